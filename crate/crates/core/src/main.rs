fn main() {
    std::process::exit(phaseseg::cli::main_with_args(std::env::args_os()));
}
