fn main() {
    std::process::exit(vdw_contact::cli::main_with_args(std::env::args_os()));
}
