//! Render a few 2dshapes samples to PPM files and print their factors.
//!
//! `cargo run --example render_shapes -- [out_dir]`

use std::path::PathBuf;

use torus_vae::data::{encode_ppm, render_2dshape, sample_factors, two_d_shapes_spec, SampleShape};

fn main() -> torus_vae::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "shapes_out".into()));
    std::fs::create_dir_all(&out).map_err(|e| torus_vae::Error::Io { path: out.clone(), source: e })?;
    let specs = two_d_shapes_spec();
    let names: Vec<&str> = specs.iter().map(|s| s.name.as_str()).collect();
    println!("factors: {}", names.join(", "));
    for (i, z) in sample_factors(&specs, 6, 2)?.iter().enumerate() {
        let img = render_2dshape(z, 64, 64)?;
        let shape = SampleShape { width: 64, height: 64, channels: 3 };
        let path = out.join(format!("shape_{i}.ppm"));
        std::fs::write(&path, encode_ppm(shape, &img.data)?).map_err(|e| torus_vae::Error::Io { path: path.clone(), source: e })?;
        println!("{} {:.3?}", path.display(), z.values);
    }
    Ok(())
}
