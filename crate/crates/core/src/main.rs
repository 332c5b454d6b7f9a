fn main() {
    std::process::exit(jcid::cli::run(std::env::args_os()));
}
