use std::fs;
use std::path::Path;

use clusterlens_core::error::PipelineError;
use clusterlens_core::pipeline::{
    analyze_files, with_threads, write_results, CacheStatus, InputSpec, Method, RunConfig,
};

use crate::{Failure, RunArgs};

fn read_input(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn describe(e: PipelineError, args: &RunArgs) -> Failure {
    let message = match &e {
        PipelineError::Data(data) if data.is_geometry() => format!("{}: {data}", args.geometry.display()),
        PipelineError::Data(data) => format!("{}: {data}", args.data.display()),
        other => other.to_string(),
    };
    if e.is_input_error() {
        Failure::input(message)
    } else {
        Failure::runtime(message)
    }
}

pub fn run(args: RunArgs) -> Result<(), Failure> {
    let methods = Method::parse_list(&args.methods).map_err(Failure::input)?;
    let config = RunConfig {
        methods,
        contiguity: args.contiguity,
        alpha: args.alpha,
        permutations: args.permutations,
        seed: args.seed,
        store_local_sketches: args.store_local_sketches,
        ..RunConfig::default()
    };
    let input = InputSpec {
        id_field: args.id_col.clone(),
        name_field: args.name_field.clone(),
        id_col: args.id_col.clone(),
        time_col: args.time_col.clone(),
        value_col: args.value_col.clone(),
    };
    let geometry = read_input(&args.geometry)?;
    let values = read_input(&args.data)?;
    let cache_dir = if args.no_cache {
        None
    } else {
        args.cache_dir
            .clone()
            .or_else(|| dirs::cache_dir().map(|d| d.join("clusterlens")))
    };

    let (rs, status) = with_threads(args.threads, || {
        analyze_files(&geometry, &values, &input, &config, cache_dir.as_deref())
    })
    .map_err(|e| describe(e, &args))?;
    write_results(&rs, &args.out).map_err(|e| describe(e, &args))?;

    let methods: Vec<&str> = rs.config.run.methods.iter().map(|m| m.as_str()).collect();
    println!("locations: {}", rs.dataset.locations.len());
    println!("timesteps: {}", rs.dataset.timesteps.len());
    println!("methods:   {}", methods.join(", "));
    println!("warnings:  {}", rs.warnings.len());
    for warning in &rs.warnings {
        println!("  - {warning}");
    }
    let cache = match status {
        CacheStatus::Hit => "hit",
        CacheStatus::Miss => "miss (stored)",
        CacheStatus::Disabled => "disabled",
    };
    println!("cache:     {cache}");
    println!("wrote {}", args.out.display());
    Ok(())
}
