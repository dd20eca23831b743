fn main() {
    std::process::exit(teichkit_cli::app::main_from(std::env::args_os()));
}
