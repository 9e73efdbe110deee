fn main() {
    std::process::exit(spinharm::cli::run(std::env::args_os()));
}
