//! Binary model files and TSV export.
//!
//! Layout (little-endian): magic `EMRB`, version `u32`, kind `u8`, k `u32`,
//! |E| `u32`, |R| `u32`, norm order `u8`, then the entity, relation and
//! (TransH only) normal matrices as row-major `f64`.

use std::fs::File;
use std::io::{BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::{EmbeddingModel, ModelKind, NormOrder, TranslationModel};
use crate::error::{Error, Result};
use crate::graph::{EntityId, KnowledgeGraph, RelationId};

const MAGIC: &[u8; 4] = b"EMRB";
const VERSION: u32 = 1;

fn kind_code(kind: ModelKind) -> u8 {
    match kind {
        ModelKind::TransE => 0,
        ModelKind::TransH => 1,
    }
}

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == ErrorKind::UnexpectedEof {
        Error::Format("truncated model file".into())
    } else {
        Error::from(e)
    }
}

impl EmbeddingModel {
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_u32::<LittleEndian>(VERSION)?;
        w.write_u8(kind_code(self.kind))?;
        w.write_u32::<LittleEndian>(self.dim as u32)?;
        w.write_u32::<LittleEndian>(self.num_entities() as u32)?;
        w.write_u32::<LittleEndian>(self.num_relations() as u32)?;
        w.write_u8(self.norm.as_u8())?;
        for x in self
            .entities
            .iter()
            .chain(&self.relations)
            .chain(&self.normals)
        {
            w.write_f64::<LittleEndian>(*x)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(truncated)?;
        if &magic != MAGIC {
            return Err(Error::Format(format!("bad magic {magic:?}")));
        }
        let version = r.read_u32::<LittleEndian>().map_err(truncated)?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let kind = match r.read_u8().map_err(truncated)? {
            0 => ModelKind::TransE,
            1 => ModelKind::TransH,
            other => return Err(Error::Format(format!("unknown model kind code {other}"))),
        };
        let dim = r.read_u32::<LittleEndian>().map_err(truncated)? as usize;
        let num_entities = r.read_u32::<LittleEndian>().map_err(truncated)? as usize;
        let num_relations = r.read_u32::<LittleEndian>().map_err(truncated)? as usize;
        let norm = match r.read_u8().map_err(truncated)? {
            1 => NormOrder::L1,
            2 => NormOrder::L2,
            other => return Err(Error::Format(format!("bad norm order {other}"))),
        };
        let mut read_matrix = |rows: usize| -> Result<Vec<f64>> {
            let mut v = vec![0.0; rows * dim];
            r.read_f64_into::<LittleEndian>(&mut v).map_err(truncated)?;
            Ok(v)
        };
        let entities = read_matrix(num_entities)?;
        let relations = read_matrix(num_relations)?;
        let normals = match kind {
            ModelKind::TransE => Vec::new(),
            ModelKind::TransH => read_matrix(num_relations)?,
        };
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(Error::Format("trailing bytes after model data".into()));
        }
        EmbeddingModel::from_parts(kind, dim, norm, entities, relations, normals)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(BufWriter::new(file))
            .map_err(|e| e.in_file(path))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(BufReader::new(file)).map_err(|e| e.in_file(path))
    }

    /// Loads a model and checks it against the graph's dictionaries.
    pub fn load_for_graph(path: impl AsRef<Path>, g: &KnowledgeGraph) -> Result<Self> {
        let model = Self::load(path)?;
        model.check_graph(g)?;
        Ok(model)
    }

    /// Writes `entities.tsv`, `relations.tsv` and, for TransH, `normals.tsv`
    /// into `dir`. Each line is the row id followed by its components.
    pub fn export_tsv(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        write_rows(dir, "entities.tsv", self.num_entities(), |i| {
            self.entity(EntityId(i as u32))
        })?;
        write_rows(dir, "relations.tsv", self.num_relations(), |i| {
            self.relation(RelationId(i as u32))
        })?;
        if self.kind == ModelKind::TransH {
            write_rows(dir, "normals.tsv", self.num_relations(), |i| {
                self.normal(RelationId(i as u32)).unwrap_or(&[])
            })?;
        }
        Ok(())
    }
}

fn write_rows<'m>(
    dir: &Path,
    name: &str,
    rows: usize,
    row: impl Fn(usize) -> &'m [f64],
) -> Result<()> {
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut w = BufWriter::new(file);
    for i in 0..rows {
        write!(w, "{i}").map_err(|e| Error::io(&path, e))?;
        for x in row(i) {
            write!(w, "\t{x}").map_err(|e| Error::io(&path, e))?;
        }
        writeln!(w).map_err(|e| Error::io(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))
}
