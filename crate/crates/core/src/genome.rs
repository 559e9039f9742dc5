//! Positional value tables, their 640-gene chromosome encoding, and the
//! line-oriented chromosome store.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::Rng;
use thiserror::Error;

use crate::chess::{Color, PieceKind, Square};

pub const GENE_MIN: f64 = -100.0;
pub const GENE_MAX: f64 = 100.0;
pub const TABLE_LEN: usize = 64;
pub const TABLE_COUNT: usize = 10;
pub const GENE_COUNT: usize = TABLE_LEN * TABLE_COUNT;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GamePhase {
    MiddleGame,
    EndGame,
}

/// The ten tables in chromosome order. Rooks and queens have no end-game
/// table; they read their middle-game table in both phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TableId {
    PawnMg,
    KnightMg,
    BishopMg,
    RookMg,
    QueenMg,
    KingMg,
    PawnEg,
    KnightEg,
    BishopEg,
    KingEg,
}

impl TableId {
    pub const ALL: [TableId; TABLE_COUNT] = [
        TableId::PawnMg,
        TableId::KnightMg,
        TableId::BishopMg,
        TableId::RookMg,
        TableId::QueenMg,
        TableId::KingMg,
        TableId::PawnEg,
        TableId::KnightEg,
        TableId::BishopEg,
        TableId::KingEg,
    ];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    #[inline]
    pub fn for_piece(kind: PieceKind, phase: GamePhase) -> TableId {
        match (kind, phase) {
            (PieceKind::Pawn, GamePhase::MiddleGame) => TableId::PawnMg,
            (PieceKind::Knight, GamePhase::MiddleGame) => TableId::KnightMg,
            (PieceKind::Bishop, GamePhase::MiddleGame) => TableId::BishopMg,
            (PieceKind::Rook, _) => TableId::RookMg,
            (PieceKind::Queen, _) => TableId::QueenMg,
            (PieceKind::King, GamePhase::MiddleGame) => TableId::KingMg,
            (PieceKind::Pawn, GamePhase::EndGame) => TableId::PawnEg,
            (PieceKind::Knight, GamePhase::EndGame) => TableId::KnightEg,
            (PieceKind::Bishop, GamePhase::EndGame) => TableId::BishopEg,
            (PieceKind::King, GamePhase::EndGame) => TableId::KingEg,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TableId::PawnMg => "pawn-mg",
            TableId::KnightMg => "knight-mg",
            TableId::BishopMg => "bishop-mg",
            TableId::RookMg => "rook-mg",
            TableId::QueenMg => "queen-mg",
            TableId::KingMg => "king-mg",
            TableId::PawnEg => "pawn-eg",
            TableId::KnightEg => "knight-eg",
            TableId::BishopEg => "bishop-eg",
            TableId::KingEg => "king-eg",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenomeError {
    #[error("expected {GENE_COUNT} genes, got {0}")]
    WrongLength(usize),
    #[error("gene {index} = {value} outside [{GENE_MIN}, {GENE_MAX}]")]
    OutOfRange { index: usize, value: f64 },
}

/// Ten 64-entry tables from White's point of view (a1 = 0 … h8 = 63).
#[derive(Debug, Clone, PartialEq)]
pub struct PvtSet {
    tables: [[f64; TABLE_LEN]; TABLE_COUNT],
}

impl PvtSet {
    pub fn zero() -> PvtSet {
        PvtSet {
            tables: [[0.0; TABLE_LEN]; TABLE_COUNT],
        }
    }

    pub fn from_tables(tables: [[f64; TABLE_LEN]; TABLE_COUNT]) -> Result<PvtSet, GenomeError> {
        for (t, table) in tables.iter().enumerate() {
            for (s, &v) in table.iter().enumerate() {
                check_gene(t * TABLE_LEN + s, v)?;
            }
        }
        Ok(PvtSet { tables })
    }

    #[inline]
    pub fn table(&self, id: TableId) -> &[f64; TABLE_LEN] {
        &self.tables[id.index()]
    }

    /// Sets one entry, clamped to the gene bounds.
    pub fn set(&mut self, id: TableId, sq: Square, value: f64) {
        self.tables[id.index()][sq.index()] = clamp_gene(value);
    }

    /// Value of `kind` of `color` on `sq`. Black reads the vertically
    /// mirrored entry.
    #[inline]
    pub fn value(&self, kind: PieceKind, color: Color, sq: Square, phase: GamePhase) -> f64 {
        let idx = match color {
            Color::White => sq.index(),
            Color::Black => sq.flip().index(),
        };
        self.tables[TableId::for_piece(kind, phase).index()][idx]
    }
}

impl Default for PvtSet {
    fn default() -> Self {
        PvtSet::zero()
    }
}

/// Flat 640-gene encoding of a [`PvtSet`].
#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome {
    genes: Vec<f64>,
}

impl Chromosome {
    /// Rejects wrong lengths and out-of-range or non-finite genes.
    pub fn new(genes: Vec<f64>) -> Result<Chromosome, GenomeError> {
        if genes.len() != GENE_COUNT {
            return Err(GenomeError::WrongLength(genes.len()));
        }
        for (i, &g) in genes.iter().enumerate() {
            check_gene(i, g)?;
        }
        Ok(Chromosome { genes })
    }

    /// Clamps every gene into bounds; non-finite genes become 0.
    pub fn clamped(genes: Vec<f64>) -> Result<Chromosome, GenomeError> {
        if genes.len() != GENE_COUNT {
            return Err(GenomeError::WrongLength(genes.len()));
        }
        Ok(Chromosome {
            genes: genes.into_iter().map(clamp_gene).collect(),
        })
    }

    pub fn zero() -> Chromosome {
        Chromosome {
            genes: vec![0.0; GENE_COUNT],
        }
    }

    #[inline]
    pub fn genes(&self) -> &[f64] {
        &self.genes
    }

    pub fn into_genes(self) -> Vec<f64> {
        self.genes
    }

    pub fn to_pvt(&self) -> PvtSet {
        unflatten(self)
    }
}

fn check_gene(index: usize, value: f64) -> Result<(), GenomeError> {
    if value.is_finite() && (GENE_MIN..=GENE_MAX).contains(&value) {
        Ok(())
    } else {
        Err(GenomeError::OutOfRange { index, value })
    }
}

#[inline]
pub fn clamp_gene(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(GENE_MIN, GENE_MAX)
    }
}

pub fn flatten(p: &PvtSet) -> Chromosome {
    Chromosome {
        genes: p.tables.iter().flat_map(|t| t.iter().copied()).collect(),
    }
}

pub fn unflatten(c: &Chromosome) -> PvtSet {
    let mut tables = [[0.0; TABLE_LEN]; TABLE_COUNT];
    for (t, chunk) in c.genes.chunks_exact(TABLE_LEN).enumerate() {
        tables[t].copy_from_slice(chunk);
    }
    PvtSet { tables }
}

/// Builds a [`PvtSet`] from a raw gene slice.
pub fn unflatten_genes(genes: &[f64]) -> Result<PvtSet, GenomeError> {
    let c = Chromosome::new(genes.to_vec())?;
    Ok(unflatten(&c))
}

/// 640 genes drawn i.i.d. uniform over the gene bounds.
pub fn random_chromosome<R: Rng + ?Sized>(rng: &mut R) -> Chromosome {
    Chromosome {
        genes: (0..GENE_COUNT)
            .map(|_| rng.random_range(GENE_MIN..=GENE_MAX))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoredChromosome {
    pub id: String,
    pub generation: u32,
    pub fitness: f64,
    pub genes: Chromosome,
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("duplicate id '{id}' on line {line}")]
    DuplicateId { line: usize, id: String },
    #[error("id '{0}' must be non-empty and free of whitespace")]
    BadId(String),
    #[error("no chromosome with id '{0}' in store")]
    NotFound(String),
}

pub const STORE_HEADER: &str = "# id\tgeneration\tfitness\tgenes[640]";

/// Serializes records in the store format; genes use 6 fractional digits.
pub fn format_store(records: &[StoredChromosome]) -> Result<String, StoreError> {
    let mut out = String::with_capacity(records.len() * GENE_COUNT * 10 + 64);
    out.push_str(STORE_HEADER);
    out.push('\n');
    for r in records {
        write_record(&mut out, r)?;
    }
    Ok(out)
}

fn write_record(out: &mut String, r: &StoredChromosome) -> Result<(), StoreError> {
    if r.id.is_empty() || r.id.chars().any(char::is_whitespace) || r.id.starts_with('#') {
        return Err(StoreError::BadId(r.id.clone()));
    }
    write!(out, "{}\t{}\t{}\t", r.id, r.generation, r.fitness).expect("write to String");
    for (i, g) in r.genes.genes().iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        // Avoid emitting "-0.000000".
        let g = if g.abs() < 5e-7 { 0.0 } else { *g };
        write!(out, "{g:.6}").expect("write to String");
    }
    out.push('\n');
    Ok(())
}

pub fn parse_store(text: &str) -> Result<Vec<StoredChromosome>, StoreError> {
    let mut records: Vec<StoredChromosome> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let malformed = |message: String| StoreError::Malformed { line, message };
        let fields: Vec<&str> = raw.split('\t').collect();
        if fields.len() != 4 {
            return Err(malformed(format!("expected 4 tab-separated fields, found {}", fields.len())));
        }
        let id = fields[0].trim().to_string();
        if id.is_empty() {
            return Err(malformed("empty id".into()));
        }
        let generation = fields[1]
            .trim()
            .parse::<u32>()
            .map_err(|_| malformed(format!("bad generation '{}'", fields[1])))?;
        let fitness = fields[2]
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|f| f.is_finite())
            .ok_or_else(|| malformed(format!("bad fitness '{}'", fields[2])))?;
        let genes = fields[3]
            .split_whitespace()
            .map(|g| {
                g.parse::<f64>()
                    .map_err(|_| malformed(format!("unparsable gene '{g}'")))
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if genes.len() != GENE_COUNT {
            return Err(malformed(format!("expected {GENE_COUNT} genes, found {}", genes.len())));
        }
        let genes = Chromosome::new(genes).map_err(|e| malformed(e.to_string()))?;
        if records.iter().any(|r| r.id == id) {
            return Err(StoreError::DuplicateId { line, id });
        }
        records.push(StoredChromosome {
            id,
            generation,
            fitness,
            genes,
        });
    }
    Ok(records)
}

pub fn save_store(path: &Path, records: &[StoredChromosome]) -> Result<(), StoreError> {
    let text = format_store(records)?;
    fs::write(path, text).map_err(|source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_store(path: &Path) -> Result<Vec<StoredChromosome>, StoreError> {
    let text = fs::read_to_string(path).map_err(|source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_store(&text)
}

/// Loads one chromosome by id.
pub fn find_in_store(path: &Path, id: &str) -> Result<StoredChromosome, StoreError> {
    load_store(path)?
        .into_iter()
        .find(|r| r.id == id)
        .ok_or_else(|| StoreError::NotFound(id.to_string()))
}
