fn main() {
    drawdown_gs::cli::run();
}
