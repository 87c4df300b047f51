fn main() {
    std::process::exit(fbcode::cli::run(std::env::args_os()));
}
