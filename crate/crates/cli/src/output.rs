//! Output files. JSON documents carry `build` and `run_config` keys; CSV
//! tables carry the same two as leading `#` comment lines.

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::RunConfig;

pub const BUILD_ID: &str = env!("HENON_BUILD_ID");

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    build: &'static str,
    run_config: &'a RunConfig,
    #[serde(flatten)]
    payload: &'a T,
}

pub struct Output<'a> {
    dir: &'a Path,
    config: &'a RunConfig,
    pub written: Vec<PathBuf>,
}

impl<'a> Output<'a> {
    pub fn new(config: &'a RunConfig) -> Result<Self> {
        let dir = config.out_dir();
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Output {
            dir,
            config,
            written: Vec::new(),
        })
    }

    /// Writes the bare config, loadable again with `--config`.
    pub fn config_file(&mut self, name: &str) -> Result<()> {
        let path = self.dir.join(format!("{name}.config.json"));
        let text = serde_json::to_string_pretty(self.config)?;
        fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
        self.written.push(path);
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, payload: &T) -> Result<()> {
        let path = self.dir.join(format!("{name}.json"));
        let env = Envelope {
            build: BUILD_ID,
            run_config: self.config,
            payload,
        };
        let text = serde_json::to_string_pretty(&env)?;
        fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
        self.written.push(path);
        Ok(())
    }

    pub fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        let path = self.dir.join(format!("{name}.csv"));
        let ctx = || format!("writing {}", path.display());
        let mut file = File::create(&path).with_context(ctx)?;
        writeln!(file, "# build: {BUILD_ID}").with_context(ctx)?;
        writeln!(file, "# run_config: {}", serde_json::to_string(self.config)?).with_context(ctx)?;
        let mut w = csv::Writer::from_writer(file);
        for r in rows {
            w.serialize(r).with_context(ctx)?;
        }
        w.flush().with_context(ctx)?;
        self.written.push(path);
        Ok(())
    }
}
