fn main() {
    std::process::exit(wavecrit_cli::main_with(std::env::args_os()));
}
