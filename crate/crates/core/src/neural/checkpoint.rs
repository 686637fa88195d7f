use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::network::{Network, Param};
use super::spec::NetworkSpec;
use crate::error::{Error, Result};

pub const CHECKPOINT_HEADER: &str = "gasfc-checkpoint v1";

/// Text dump: header, spec as one JSON line, then per tensor a
/// `param <name> <d0>x<d1>...` line followed by its row-major values.
pub fn save_checkpoint(net: &Network, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str(CHECKPOINT_HEADER);
    out.push('\n');
    let spec = serde_json::to_string(net.spec()).map_err(|e| Error::invalid(e.to_string()))?;
    writeln!(out, "spec {spec}").unwrap();
    for p in net.params() {
        let dims: Vec<String> = p.shape.iter().map(usize::to_string).collect();
        writeln!(out, "param {} {}", p.name, dims.join("x")).unwrap();
        let vals: Vec<String> = p.value.iter().map(f64::to_string).collect();
        out.push_str(&vals.join(" "));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<Network> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let perr = |line: usize, m: &str| Error::Parse {
        path: path.to_path_buf(),
        line: line as u64,
        message: m.to_string(),
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CHECKPOINT_HEADER => {}
        _ => return Err(perr(1, "missing checkpoint header")),
    }
    let spec: NetworkSpec = match lines.next() {
        Some((i, l)) => {
            let json = l.strip_prefix("spec ").ok_or_else(|| perr(i + 1, "expected spec line"))?;
            serde_json::from_str(json).map_err(|e| perr(i + 1, &e.to_string()))?
        }
        None => return Err(perr(2, "missing spec line")),
    };
    let mut params = Vec::new();
    while let Some((i, l)) = lines.next() {
        if l.is_empty() {
            continue;
        }
        let mut f = l.split(' ');
        if f.next() != Some("param") {
            return Err(perr(i + 1, "expected param line"));
        }
        let name = f.next().ok_or_else(|| perr(i + 1, "missing name"))?.to_string();
        let shape: Vec<usize> = f
            .next()
            .ok_or_else(|| perr(i + 1, "missing shape"))?
            .split('x')
            .map(|d| d.parse().map_err(|_| perr(i + 1, "bad shape")))
            .collect::<Result<_>>()?;
        let (j, vals) = lines.next().ok_or_else(|| perr(i + 2, "missing values"))?;
        let value: Vec<f64> = if vals.is_empty() {
            Vec::new()
        } else {
            vals.split(' ')
                .map(|v| v.parse().map_err(|_| perr(j + 1, "bad value")))
                .collect::<Result<_>>()?
        };
        if value.len() != shape.iter().product::<usize>() {
            return Err(perr(j + 1, "value count does not match shape"));
        }
        params.push(Param { name, shape, value });
    }
    let mut net = Network::new(spec, 0)?;
    net.set_params(params)?;
    Ok(net)
}
