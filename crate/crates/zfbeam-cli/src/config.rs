//! Flat key-value config files with `[system]`, `[sweep]` and `[users]`
//! sections, plus the bundled scenario presets. SNR values are given in dB
//! and converted once here; everything downstream is linear.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use zfbeam::montecarlo::{CodebookPolicy, SimulationConfig};
use zfbeam::scheme::{db_to_linear, SystemConfig, UserProfile};

#[derive(Debug)]
pub struct ConfigError {
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError {
        message: message.into(),
    })
}

/// Parsed, resolved run description.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub antennas: usize,
    pub users: Vec<UserProfile>,
    /// Single-point SNR for `select`.
    pub rho_db: f64,
    /// Sweep grid for `simulate`.
    pub sweep_rho_db: Vec<f64>,
    pub s_values: Vec<usize>,
    pub n_blocks: usize,
    pub codebook_policy: CodebookPolicy,
    /// Where the config came from (path or preset name), for the manifest.
    pub source: String,
    /// Raw resolved key/value view, for the manifest.
    resolved: Vec<(String, String)>,
}

impl RunConfig {
    pub fn system(&self, rho_db: f64) -> Result<SystemConfig, ConfigError> {
        SystemConfig::new(self.antennas, self.users.clone(), db_to_linear(rho_db))
            .map_err(|e| ConfigError { message: e.to_string() })
    }

    pub fn simulation(&self, seed: u64, n_blocks_override: Option<usize>) -> Result<SimulationConfig, ConfigError> {
        Ok(SimulationConfig {
            system: self.system(self.rho_db)?,
            s_values: self.s_values.clone(),
            rho_grid_db: self.sweep_rho_db.clone(),
            n_blocks: n_blocks_override.unwrap_or(self.n_blocks),
            seed,
            codebook_policy: self.codebook_policy,
        })
    }

    pub fn manifest_lines(&self) -> &[(String, String)] {
        &self.resolved
    }
}

/// Names accepted where a config path is expected.
pub const PRESETS: [&str; 2] = ["fig1_r6", "fig1_r12"];

fn preset_text(name: &str) -> Option<&'static str> {
    // the two bundled scenarios: L = m = 4, γ = 1, ρ from −10 to 30 dB,
    // every on-count, feedback rate 6 or 12 bits
    match name {
        "fig1_r6" => Some(
            "[system]\nantennas = 4\nusers = 4\ngamma = 1.0\nrate_bits = 6\nrho_db = 20.0\n\
             [sweep]\nrho_db = -10:30:5\ns = 1,2,3,4\nn_blocks = 10000\ncodebook_policy = resampled\n",
        ),
        "fig1_r12" => Some(
            "[system]\nantennas = 4\nusers = 4\ngamma = 1.0\nrate_bits = 12\nrho_db = 20.0\n\
             [sweep]\nrho_db = -10:30:5\ns = 1,2,3,4\nn_blocks = 10000\ncodebook_policy = resampled\n",
        ),
        _ => None,
    }
}

/// Load a config from a file path, or from a bundled preset when the
/// argument names one and no such file exists.
pub fn load(arg: &str) -> Result<RunConfig, ConfigError> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError { message: format!("cannot read {arg}: {e}") })?;
        parse(&text, arg)
    } else if let Some(text) = preset_text(arg) {
        parse(text, &format!("{arg} (bundled preset)"))
    } else {
        err(format!(
            "no config file at '{arg}' and no such preset (presets: {})",
            PRESETS.join(", ")
        ))
    }
}

/// Parse `start:stop:step` or a comma list into a float grid.
fn parse_grid(text: &str, key: &str) -> Result<Vec<f64>, ConfigError> {
    let text = text.trim();
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return err(format!("{key}: expected start:stop:step, got '{text}'"));
        }
        let nums: Result<Vec<f64>, _> = parts.iter().map(|p| p.trim().parse::<f64>()).collect();
        let nums = nums.map_err(|e| ConfigError { message: format!("{key}: {e}") })?;
        let (start, stop, step) = (nums[0], nums[1], nums[2]);
        if step <= 0.0 || stop < start {
            return err(format!("{key}: bad range '{text}'"));
        }
        let mut grid = Vec::new();
        let n = ((stop - start) / step).round() as usize;
        for k in 0..=n {
            let v = start + step * k as f64;
            if v <= stop + 1e-9 {
                grid.push(v);
            }
        }
        Ok(grid)
    } else {
        text.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| ConfigError { message: format!("{key}: {e}") }))
            .collect()
    }
}

fn parse(text: &str, source: &str) -> Result<RunConfig, ConfigError> {
    let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
    let mut current = String::from("system");
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or(ConfigError { message: format!("line {}: unterminated section", idx + 1) })?;
            current = name.trim().to_lowercase();
            sections.entry(current.clone()).or_default();
        } else if let Some((key, value)) = line.split_once('=') {
            sections
                .entry(current.clone())
                .or_default()
                .insert(key.trim().to_lowercase(), value.trim().to_string());
        } else {
            return err(format!("line {}: expected 'key = value', got '{line}'", idx + 1));
        }
    }

    let get = |section: &str, key: &str| -> Option<String> {
        sections.get(section).and_then(|s| s.get(key)).cloned()
    };
    let parse_num = |section: &str, key: &str, default: Option<f64>| -> Result<f64, ConfigError> {
        match get(section, key) {
            Some(v) => v.parse::<f64>().map_err(|e| ConfigError { message: format!("[{section}] {key}: {e}") }),
            None => default.ok_or(ConfigError { message: format!("missing [{section}] {key}") }),
        }
    };

    let antennas = parse_num("system", "antennas", None)? as usize;
    let m = parse_num("system", "users", None)? as usize;
    if antennas == 0 || m == 0 {
        return err("antennas and users must both be >= 1");
    }
    let default_gamma = parse_num("system", "gamma", Some(1.0))?;
    let default_rate = parse_num("system", "rate_bits", Some(6.0))? as u32;
    let rho_db = parse_num("system", "rho_db", Some(10.0))?;

    let mut users = vec![
        UserProfile {
            gamma: default_gamma,
            rate_bits: default_rate,
        };
        m
    ];
    if let Some(overrides) = sections.get("users") {
        for (key, value) in overrides {
            let (index, field) = key
                .split_once('.')
                .ok_or(ConfigError { message: format!("[users] {key}: expected '<index>.<field>'") })?;
            let index: usize = index
                .parse()
                .map_err(|e| ConfigError { message: format!("[users] {key}: {e}") })?;
            if index >= m {
                return err(format!("[users] {key}: index out of range (m = {m})"));
            }
            let value: f64 = value
                .parse()
                .map_err(|e| ConfigError { message: format!("[users] {key}: {e}") })?;
            match field {
                "gamma" => users[index].gamma = value,
                "rate_bits" => users[index].rate_bits = value as u32,
                other => return err(format!("[users] {key}: unknown field '{other}'")),
            }
        }
    }

    let sweep_rho_db = match get("sweep", "rho_db") {
        Some(v) => parse_grid(&v, "[sweep] rho_db")?,
        None => vec![rho_db],
    };
    let s_values: Vec<usize> = match get("sweep", "s") {
        Some(v) => parse_grid(&v, "[sweep] s")?.into_iter().map(|x| x as usize).collect(),
        None => (1..=antennas).collect(),
    };
    let n_blocks = parse_num("sweep", "n_blocks", Some(10_000.0))? as usize;
    let codebook_policy = match get("sweep", "codebook_policy").as_deref() {
        None | Some("resampled") => CodebookPolicy::ResampledPerBlock,
        Some("fixed") => CodebookPolicy::FixedPerRun,
        Some(other) => return err(format!("[sweep] codebook_policy: '{other}' (use resampled|fixed)")),
    };

    let mut resolved = vec![
        ("system.antennas".into(), antennas.to_string()),
        ("system.users".into(), m.to_string()),
        ("system.rho_db".into(), rho_db.to_string()),
        (
            "sweep.rho_db".into(),
            sweep_rho_db.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
        ),
        (
            "sweep.s".into(),
            s_values.iter().map(usize::to_string).collect::<Vec<_>>().join(","),
        ),
        ("sweep.n_blocks".into(), n_blocks.to_string()),
        (
            "sweep.codebook_policy".into(),
            match codebook_policy {
                CodebookPolicy::ResampledPerBlock => "resampled".into(),
                CodebookPolicy::FixedPerRun => "fixed".to_string(),
            },
        ),
    ];
    for (i, u) in users.iter().enumerate() {
        resolved.push((format!("user.{i}"), format!("gamma={} rate_bits={}", u.gamma, u.rate_bits)));
    }

    Ok(RunConfig {
        antennas,
        users,
        rho_db,
        sweep_rho_db,
        s_values,
        n_blocks,
        codebook_policy,
        source: source.to_string(),
        resolved,
    })
}

/// Write the manifest that makes an output reproducible: tool version,
/// subcommand, seed, resolved config, and output path.
pub fn write_manifest(
    out_path: &Path,
    subcommand: &str,
    seed: u64,
    extra: &[(String, String)],
    config_lines: &[(String, String)],
) -> std::io::Result<std::path::PathBuf> {
    let manifest_path = out_path.with_extension(format!(
        "{}manifest",
        out_path
            .extension()
            .map(|e| format!("{}.", e.to_string_lossy()))
            .unwrap_or_default()
    ));
    let mut body = String::new();
    body.push_str(&format!("tool = zfbeam {}\n", env!("CARGO_PKG_VERSION")));
    body.push_str(&format!("subcommand = {subcommand}\n"));
    body.push_str(&format!("seed = {seed}\n"));
    body.push_str(&format!("output = {}\n", out_path.display()));
    for (k, v) in extra {
        body.push_str(&format!("{k} = {v}\n"));
    }
    for (k, v) in config_lines {
        body.push_str(&format!("{k} = {v}\n"));
    }
    std::fs::write(&manifest_path, body)?;
    Ok(manifest_path)
}
