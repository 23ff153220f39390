fn main() {
    std::process::exit(blemodel_cli::main_with_args(std::env::args_os()));
}
