fn main() {
    std::process::exit(moving_targets::cli::main_from(std::env::args_os()));
}
