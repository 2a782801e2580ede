fn main() {
    std::process::exit(pbholo::cli::run());
}
