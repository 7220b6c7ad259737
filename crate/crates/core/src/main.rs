fn main() {
    std::process::exit(quartic_cert::cli::run(std::env::args_os()));
}
