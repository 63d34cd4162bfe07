fn main() {
    std::process::exit(tentacle_nav::cli::main(std::env::args_os()));
}
