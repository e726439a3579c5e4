fn main() {
    std::process::exit(fqh_imps::cli::main_with_args(std::env::args_os()));
}
