fn main() {
    std::process::exit(thermostat::cli::run(std::env::args()));
}
