//! `synth`: writes a procedurally generated OFF mesh, so the pipeline can
//! be exercised without any external data.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};

use meshbench::mesh::{io, synth};

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Shape {
    Icosphere,
    BumpySphere,
    PlaneGrid,
    Tetrahedron,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// What to generate.
    #[arg(long, value_enum, default_value = "bumpy-sphere")]
    pub shape: Shape,
    /// Output OFF file.
    #[arg(long)]
    pub out: PathBuf,
    /// Sphere radius / tetrahedron scale.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Icosphere subdivision level (vertex count grows 4× per level).
    #[arg(long, default_value_t = 4)]
    pub subdivisions: u32,
    /// Bump amplitude for the bumpy sphere, relative to the radius.
    #[arg(long, default_value_t = 0.25)]
    pub amplitude: f64,
    /// Plane grid resolution (vertices per side).
    #[arg(long, default_value_t = 50)]
    pub side: usize,
    /// Plane grid spacing.
    #[arg(long, default_value_t = 0.1)]
    pub spacing: f64,
}

pub fn run(args: &SynthArgs) -> Result<()> {
    let mesh = match args.shape {
        Shape::Icosphere => synth::icosphere(args.radius, args.subdivisions),
        Shape::BumpySphere => {
            synth::bumpy_sphere(args.radius, args.subdivisions, args.amplitude)
        }
        Shape::PlaneGrid => synth::plane_grid(args.side, args.side, args.spacing),
        Shape::Tetrahedron => synth::tetrahedron(args.radius),
    };
    io::write_mesh(&args.out, &mesh)
        .with_context(|| format!("writing {}", args.out.display()))?;
    eprintln!(
        "wrote {} ({} vertices, {} faces)",
        args.out.display(),
        mesh.nv(),
        mesh.nf()
    );
    Ok(())
}
