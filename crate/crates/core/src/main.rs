fn main() {
    std::process::exit(excess_risk_lab::cli::run_cli(std::env::args_os()));
}
