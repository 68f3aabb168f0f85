fn main() {
    std::process::exit(scene_rerank::cli::dispatch(std::env::args_os()));
}
