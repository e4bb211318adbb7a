fn main() {
    std::process::exit(thermoplate_cli::main_with_args(std::env::args_os()));
}
