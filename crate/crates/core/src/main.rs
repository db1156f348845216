fn main() {
    std::process::exit(latbound::cli::run(std::env::args_os()));
}
