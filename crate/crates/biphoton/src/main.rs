fn main() {
    std::process::exit(biphoton::app::run());
}
