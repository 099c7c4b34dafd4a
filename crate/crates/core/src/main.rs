fn main() {
    std::process::exit(dfs_decoy::cli::run(std::env::args_os()));
}
