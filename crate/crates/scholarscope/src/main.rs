fn main() {
    std::process::exit(scholarscope::cli::main_with_env());
}
