fn main() {
    std::process::exit(osclab_cli::run(std::env::args_os()));
}
