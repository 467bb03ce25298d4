fn main() {
    std::process::exit(ugen::cli::run(std::env::args_os()));
}
