fn main() {
    std::process::exit(hjb_variance::cli::run(std::env::args_os()));
}
