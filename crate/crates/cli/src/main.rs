fn main() {
    std::process::exit(mycosig_cli::main_with_args(std::env::args_os()));
}
