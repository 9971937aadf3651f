//! On the biased cycle, mixing and the rotating target grow like n^2 while
//! the static hitting time grows like n.

use moving_targets::adversary::separation_demo;
use moving_targets::scalar::rational;

fn main() -> moving_targets::Result<()> {
    let report = separation_demo(&[16, 32, 64], &rational(3, 4), &rational(1, 4))?;
    println!("{:>4} {:>10} {:>12} {:>12}", "n", "t_mix", "t_H(1/4)", "rotating");
    for row in &report.rows {
        println!("{:>4} {:>10} {:>12.3} {:>12.3}", row.n, row.t_mix_lazy, row.t_hit_f64, row.rotating);
    }
    println!("ratios per doubling: t_mix {:?}", report.t_mix_ratios);
    println!("                     rotating {:?}", report.rotating_ratios);
    println!("                     t_H {:?}", report.t_hit_ratios);
    println!("within bands: {}", report.passes);
    Ok(())
}
