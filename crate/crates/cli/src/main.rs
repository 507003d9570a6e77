fn main() {
    std::process::exit(esd_indep_cli::run(std::env::args()));
}
