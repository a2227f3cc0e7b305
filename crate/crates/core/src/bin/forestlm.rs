fn main() {
    std::process::exit(forestlm::cli::main())
}
