fn main() {
    std::process::exit(bro_mimo::cli::run(std::env::args_os()));
}
