fn main() {
    // MASTLAB_THREADS caps the worker pool; it never changes results because
    // every replicate owns its own RNG stream and records are assembled in
    // replicate order.
    #[cfg(feature = "parallel")]
    if let Ok(value) = std::env::var("MASTLAB_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            if threads >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
    std::process::exit(mastlab::cli::run(std::env::args().collect()));
}
