fn main() {
    std::process::exit(translucent_cli::run(std::env::args_os()));
}
