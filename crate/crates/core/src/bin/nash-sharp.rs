fn main() {
    std::process::exit(nash_sharp::cli::main_with_args(std::env::args_os()));
}
