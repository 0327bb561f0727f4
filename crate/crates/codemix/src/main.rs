fn main() {
    env_logger::init();
    std::process::exit(codemix::cli::run(std::env::args_os()));
}
