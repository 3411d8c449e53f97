fn main() {
    std::process::exit(nesterov_cert::cli::run());
}
