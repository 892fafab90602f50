//! Directory bundles of configurations.
//!
//! `config.txt` holds `key = value` lines (`#` starts a comment); the fields
//! are `connection.bin` (the periodic part `a` as a one-form) and
//! `f1.bin … fn.bin`, `g1.bin … gn.bin`, all in the binary field format of
//! [`crate::torusgeom::io`].

use super::{bundle_of, Configuration};
use crate::error::{Error, Result};
use crate::torusgeom::io::{read_field, write_field};
use crate::torusgeom::{Bundle, Connection, FieldGrid, Rank, TorusGrid};
use crate::CONVENTIONS_VERSION;
use rustfft::num_complex::Complex64;
use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::Path;

const FORMAT: &str = "gsw-bundle-1";

#[derive(Debug, Clone, PartialEq)]
pub struct BundleMeta {
    pub seed: Option<u64>,
    pub conventions: String,
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

pub fn write_bundle(dir: &Path, cfg: &Configuration, seed: Option<u64>) -> Result<()> {
    fs::create_dir_all(dir)?;
    let grid = &cfg.grid;
    let lengths: Vec<String> = grid.lengths().iter().map(|l| format!("{l:e}")).collect();
    let mut text = String::new();
    text.push_str("# GSW configuration bundle\n");
    text.push_str(&format!("format = {FORMAT}\n"));
    text.push_str(&format!("conventions = {CONVENTIONS_VERSION}\n"));
    text.push_str(&format!("dim = {}\n", grid.dim()));
    text.push_str(&format!("sizes = {}\n", join(grid.sizes())));
    text.push_str(&format!("lengths = {}\n", lengths.join(",")));
    text.push_str(&format!("degree = {}\n", cfg.degree()));
    text.push_str(&format!("t = {:e}\n", cfg.t));
    text.push_str(&format!("n = {}\n", cfg.n()));
    if let Some(s) = seed {
        text.push_str(&format!("seed = {s}\n"));
    }
    fs::write(dir.join("config.txt"), text)?;

    let a = FieldGrid {
        rank: Rank::OneForm,
        bundle: Bundle::Line(cfg.degree()),
        components: cfg
            .conn
            .perturbation()
            .iter()
            .map(|c| c.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect(),
    };
    write_field(
        BufWriter::new(File::create(dir.join("connection.bin"))?),
        grid,
        &a,
    )?;
    let bundle = bundle_of(cfg);
    for (prefix, sections) in [("f", &cfg.f), ("g", &cfg.g)] {
        for (i, s) in sections.iter().enumerate() {
            let field = FieldGrid {
                rank: Rank::Scalar,
                bundle,
                components: vec![s.clone()],
            };
            let path = dir.join(format!("{prefix}{}.bin", i + 1));
            write_field(BufWriter::new(File::create(path)?), grid, &field)?;
        }
    }
    Ok(())
}

fn parse_config(text: &str) -> Result<HashMap<String, String>> {
    let mut map = HashMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Format(format!("config.txt line {}: expected key = value", no + 1))
        })?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn get<'a>(map: &'a HashMap<String, String>, key: &str) -> Result<&'a str> {
    map.get(key)
        .map(String::as_str)
        .ok_or_else(|| Error::Format(format!("config.txt is missing '{key}'")))
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Format(format!("config.txt: bad value '{v}' for '{key}'")))
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',').map(|s| parse(key, s.trim())).collect()
}

fn load(dir: &Path, name: &str, grid: &TorusGrid) -> Result<FieldGrid> {
    let file = File::open(dir.join(name)).map_err(|e| Error::Format(format!("{name}: {e}")))?;
    let (g, field) = read_field(BufReader::new(file))?;
    if &g != grid {
        return Err(Error::Format(format!("{name} is on a different grid")));
    }
    Ok(field)
}

pub fn read_bundle(dir: &Path) -> Result<(Configuration, BundleMeta)> {
    let text = fs::read_to_string(dir.join("config.txt"))?;
    let map = parse_config(&text)?;
    let format = get(&map, "format")?;
    if format != FORMAT {
        return Err(Error::Format(format!(
            "unsupported bundle format '{format}'"
        )));
    }
    let dim: usize = parse("dim", get(&map, "dim")?)?;
    let sizes: Vec<usize> = parse_list("sizes", get(&map, "sizes")?)?;
    let lengths: Vec<f64> = parse_list("lengths", get(&map, "lengths")?)?;
    if sizes.len() != dim || lengths.len() != dim {
        return Err(Error::Format(
            "sizes and lengths must have dim entries".into(),
        ));
    }
    let grid = TorusGrid::new(&sizes, &lengths)?;
    let degree: i64 = parse("degree", get(&map, "degree")?)?;
    let t: f64 = parse("t", get(&map, "t")?)?;
    let n: usize = parse("n", get(&map, "n")?)?;
    let seed = map.get("seed").map(|s| parse("seed", s)).transpose()?;
    let conventions = map.get("conventions").cloned().unwrap_or_default();

    let a = load(dir, "connection.bin", &grid)?;
    if a.rank != Rank::OneForm {
        return Err(Error::Format("connection.bin must hold a one-form".into()));
    }
    if a.max_imag() != 0.0 {
        return Err(Error::Format("connection.bin must be real".into()));
    }
    let a: Vec<Vec<f64>> = a
        .components
        .iter()
        .map(|c| c.iter().map(|z| z.re).collect())
        .collect();
    let conn = Connection::background(&grid, degree)?.with_perturbation(&grid, a)?;
    let sections = |prefix: &str| -> Result<Vec<Vec<Complex64>>> {
        (1..=n)
            .map(|i| {
                let name = format!("{prefix}{i}.bin");
                let mut f = load(dir, &name, &grid)?;
                f.require_rank(Rank::Scalar)?;
                if f.bundle.degree() != degree {
                    return Err(Error::Format(format!(
                        "{name} is a section of the wrong bundle"
                    )));
                }
                Ok(f.components.remove(0))
            })
            .collect()
    };
    let f = sections("f")?;
    let g = sections("g")?;
    let cfg = Configuration::new(&grid, conn, f, g, t)?;
    Ok((cfg, BundleMeta { seed, conventions }))
}
