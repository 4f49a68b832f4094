//! Write a deterministic drip test image (and a constant control) as PNG:
//! `cargo run -p fractalmark-eval --example mkimg -- <size> <seed> <out.png>`

use fractalmark_core::write_png;
use fractalmark_eval::drip_image;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let size: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(256);
    let seed: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1);
    let out = args.get(3).cloned().unwrap_or_else(|| "drip.png".into());
    write_png(std::path::Path::new(&out), &drip_image(size, seed).to_raster()).unwrap();
    println!("wrote {out} ({size}x{size}, seed {seed})");
}
