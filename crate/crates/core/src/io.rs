//! JSON files for topologies and traffic matrices.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::topology::Topology;
use crate::traffic::TrafficMatrix;
use crate::CoreError;

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CoreError> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), CoreError> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_topology(path: &Path) -> Result<Topology, CoreError> {
    read_json(path)
}

pub fn write_topology(t: &Topology, path: &Path) -> Result<(), CoreError> {
    write_json(t, path)
}

pub fn read_traffic(path: &Path) -> Result<TrafficMatrix, CoreError> {
    read_json(path)
}

pub fn write_traffic(tm: &TrafficMatrix, path: &Path) -> Result<(), CoreError> {
    write_json(tm, path)
}
