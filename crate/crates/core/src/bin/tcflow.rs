fn main() {
    std::process::exit(tcflow::cli::run(std::env::args_os()));
}
