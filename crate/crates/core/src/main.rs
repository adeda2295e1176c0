fn main() {
    std::process::exit(interpol_lab::cli::main_with_args(std::env::args_os()));
}
