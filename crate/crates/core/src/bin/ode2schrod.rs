fn main() {
    std::process::exit(ode2schrod::cli::run_from_args(std::env::args_os()));
}
