use std::fmt::Write as _;
use std::fs;

use slpinn::{Field, LayeredGrid, Manufactured, ModelFile};

use crate::{CliResult, DumpArgs, Failure};

/// `x,z,prediction,exact,error` on a layered grid; one-input fields use `x = 0`.
pub fn fields_csv(model_file: ModelFile, resolution: usize, x_points: usize) -> CliResult<String> {
    let model = model_file.into_model()?;
    let v = model.viscosity();
    let exact = Manufactured::new(v).field(model.target());
    let dims = model.dims();
    let grid = LayeredGrid::with_resolution(v, resolution, if dims == 1 { 1 } else { x_points });
    let mut out = String::from("x,z,prediction,exact,error\n");
    for p in grid.points(dims) {
        let (pred, want) = (model.value(p), exact.value(p));
        let _ = writeln!(out, "{:e},{:e},{:e},{:e},{:e}", p[0], p[1], pred, want, (pred - want).abs());
    }
    Ok(out)
}

pub fn run(args: DumpArgs) -> CliResult {
    if args.resolution < 4 {
        return Err(Failure::Config("--resolution must be at least 4".into()));
    }
    let file = ModelFile::load(&args.model)?;
    let csv = fields_csv(file, args.resolution, args.x_points)?;
    match &args.out {
        Some(path) => fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}
