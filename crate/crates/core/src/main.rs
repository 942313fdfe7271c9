fn main() {
    std::process::exit(ifl::cli::main_with(std::env::args_os()));
}
