fn main() {
    std::process::exit(rupture_lab::run(std::env::args_os()));
}
