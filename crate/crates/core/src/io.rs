//! Text formats for levels, NCL graphs, partition instances and move lists.
//!
//! Every document is a JSON object carrying `format_version`. The canonical
//! encoding sorts object keys and cell lists and puts each top-level field on
//! its own line (each element on its own line for arrays of objects), so
//! `serialize(parse(text)) == text` for any canonical document.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::grid::{Board, Cell, Dir};
use crate::hanano::{Block, BlockId, BlockKind, Flower, HananoAction, HananoLevel, HananoLevelError, Host};
use crate::jelly::{Colour, Jelly, JellyLevel, JellyMove, LevelError};
use crate::ncl::{EdgeId, NclEdge, NclGraph, Orientation, VertexId, VertexKind};
use crate::partition::{AbcInstance, PartitionInstance};

pub const FORMAT_VERSION: u32 = 1;

/// Largest board area accepted from a file.
const MAX_AREA: i64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IoError {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unsupported format_version {0}")]
    Version(u32),
    #[error("cell {0} lies outside the board")]
    Bounds(Cell),
    #[error("cell {0} is occupied twice")]
    Overlap(Cell),
    #[error("piece {0} is not one connected polyomino")]
    DisconnectedJelly(u32),
    #[error("unknown colour {0:?}")]
    BadColour(String),
    #[error("invalid document: {0}")]
    Invalid(String),
}

fn syntax(e: impl std::fmt::Display) -> IoError {
    IoError::Syntax(e.to_string())
}

type Pair = [i32; 2];

fn pair(c: Cell) -> Pair {
    [c.x, c.y]
}

fn cell(p: Pair) -> Cell {
    Cell::new(p[0], p[1])
}

fn sorted_pairs(cells: impl IntoIterator<Item = Cell>) -> Vec<Pair> {
    let mut v: Vec<Cell> = cells.into_iter().collect();
    v.sort();
    v.into_iter().map(pair).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Game {
    Jelly,
    Hanano,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Level {
    Jelly(JellyLevel),
    Hanano(HananoLevel),
}

impl Level {
    pub fn game(&self) -> Game {
        match self {
            Level::Jelly(_) => Game::Jelly,
            Level::Hanano(_) => Game::Hanano,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelDocument {
    pub level: Level,
    /// Free-form annotations: generator provenance, gadget roles.
    pub metadata: BTreeMap<String, Value>,
}

impl LevelDocument {
    pub fn new(level: Level) -> Self {
        LevelDocument {
            level,
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl Serialize) -> Self {
        let v = serde_json::to_value(value).expect("metadata serializes");
        self.metadata.insert(key.to_string(), v);
        self
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLevel {
    format_version: u32,
    game: Game,
    width: i32,
    height: i32,
    walls: Vec<Pair>,
    #[serde(default)]
    palette: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    jellies: Option<Vec<RawJelly>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    blocks: Option<Vec<RawBlock>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    flowers: Option<Vec<RawFlower>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    metadata: BTreeMap<String, Value>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJelly {
    id: u32,
    colour: String,
    cells: Vec<Pair>,
    anchored: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBlock {
    id: u32,
    cells: Vec<Pair>,
    /// Absent for grey blocks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    colour: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    arrow: Option<Dir>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bloomed: Option<bool>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFlower {
    colour: String,
    cell: Pair,
    /// Id of the hosting block; absent for terrain flowers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    on_block: Option<u32>,
}

fn check_version(v: u32) -> Result<(), IoError> {
    if v != FORMAT_VERSION {
        return Err(IoError::Version(v));
    }
    Ok(())
}

fn build_board(width: i32, height: i32, walls: &[Pair]) -> Result<Board, IoError> {
    if width <= 0 || height <= 0 || width as i64 * height as i64 > MAX_AREA {
        return Err(IoError::Invalid(format!("board size {width}x{height}")));
    }
    let mut board = Board::new(width, height);
    for &w in walls {
        let c = cell(w);
        if !board.in_bounds(c) {
            return Err(IoError::Bounds(c));
        }
        if board.is_wall(c) {
            return Err(IoError::Overlap(c));
        }
        board.set_wall(c, true);
    }
    Ok(board)
}

/// Cells must lie on the board before the engine validators index them.
fn check_bounds(board: &Board, cells: &[Pair]) -> Result<Vec<Cell>, IoError> {
    cells
        .iter()
        .map(|&p| {
            let c = cell(p);
            if board.in_bounds(c) {
                Ok(c)
            } else {
                Err(IoError::Bounds(c))
            }
        })
        .collect()
}

fn palette_index(palette: &[String], label: &str) -> Result<u16, IoError> {
    palette
        .iter()
        .position(|p| p == label)
        .map(|i| i as u16)
        .ok_or_else(|| IoError::BadColour(label.to_string()))
}

fn check_palette(palette: &[String]) -> Result<(), IoError> {
    for (i, p) in palette.iter().enumerate() {
        if p == "black" || palette[..i].contains(p) {
            return Err(IoError::BadColour(p.clone()));
        }
    }
    Ok(())
}

fn from_jelly_error(e: LevelError) -> IoError {
    match e {
        LevelError::Bounds(c) => IoError::Bounds(c),
        LevelError::Overlap(c) => IoError::Overlap(c),
        LevelError::Disconnected(id) => IoError::DisconnectedJelly(id.0),
        LevelError::BadColour(i) => IoError::BadColour(format!("#{i}")),
        other => IoError::Invalid(other.to_string()),
    }
}

fn from_hanano_error(e: HananoLevelError) -> IoError {
    match e {
        HananoLevelError::Bounds(c) => IoError::Bounds(c),
        HananoLevelError::Overlap(c) => IoError::Overlap(c),
        HananoLevelError::Disconnected(id) => IoError::DisconnectedJelly(id.0),
        HananoLevelError::BadColour(i) => IoError::BadColour(format!("#{i}")),
        other => IoError::Invalid(other.to_string()),
    }
}

fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T, IoError> {
    serde_json::from_str(text).map_err(syntax)
}

pub fn parse_level(text: &str) -> Result<LevelDocument, IoError> {
    let raw: RawLevel = parse_json(text)?;
    check_version(raw.format_version)?;
    let board = build_board(raw.width, raw.height, &raw.walls)?;
    check_palette(&raw.palette)?;
    let level = match raw.game {
        Game::Jelly => {
            if raw.blocks.is_some() || raw.flowers.is_some() {
                return Err(IoError::Invalid("jelly levels have no blocks or flowers".into()));
            }
            let mut level = JellyLevel::new(board);
            level.palette = raw.palette;
            for j in raw.jellies.unwrap_or_default() {
                let colour = if j.colour == "black" {
                    Colour::Black
                } else {
                    Colour::Tint(palette_index(&level.palette, &j.colour)?)
                };
                let cells = check_bounds(&level.board, &j.cells)?;
                level.jellies.push(Jelly::new(j.id, colour, cells, j.anchored));
            }
            level.jellies.sort_by_key(|j| j.id);
            level.validate().map_err(from_jelly_error)?;
            Level::Jelly(level)
        }
        Game::Hanano => {
            if raw.jellies.is_some() {
                return Err(IoError::Invalid("hanano levels have no jellies".into()));
            }
            let mut level = HananoLevel::new(board);
            level.palette = raw.palette;
            for b in raw.blocks.unwrap_or_default() {
                let cells = check_bounds(&level.board, &b.cells)?;
                let kind = match b.colour {
                    None => {
                        if b.arrow.is_some() || b.bloomed.is_some() {
                            return Err(IoError::Invalid(format!("grey block {} has an arrow", b.id)));
                        }
                        BlockKind::Grey
                    }
                    Some(label) => BlockKind::Coloured {
                        colour: palette_index(&level.palette, &label)?,
                        arrow: b.arrow.ok_or_else(|| {
                            IoError::Invalid(format!("coloured block {} has no arrow", b.id))
                        })?,
                        bloomed: b.bloomed.unwrap_or(false),
                    },
                };
                let mut block = Block::grey(b.id, cells);
                block.kind = kind;
                level.blocks.push(block);
            }
            for f in raw.flowers.unwrap_or_default() {
                let c = check_bounds(&level.board, &[f.cell])?[0];
                level.flowers.push(Flower {
                    colour: palette_index(&level.palette, &f.colour)?,
                    cell: c,
                    host: f.on_block.map_or(Host::Terrain, |id| Host::Block(BlockId(id))),
                });
            }
            level.blocks.sort_by_key(|b| b.id);
            level.flowers.sort_by_key(|f| f.cell);
            level.validate().map_err(from_hanano_error)?;
            Level::Hanano(level)
        }
    };
    Ok(LevelDocument {
        level,
        metadata: raw.metadata,
    })
}

fn raw_level(doc: &LevelDocument) -> RawLevel {
    let (board, palette) = match &doc.level {
        Level::Jelly(l) => (&l.board, &l.palette),
        Level::Hanano(l) => (&l.board, &l.palette),
    };
    let mut raw = RawLevel {
        format_version: FORMAT_VERSION,
        game: doc.level.game(),
        width: board.width(),
        height: board.height(),
        walls: sorted_pairs(board.walls()),
        palette: palette.clone(),
        jellies: None,
        blocks: None,
        flowers: None,
        metadata: doc.metadata.clone(),
    };
    match &doc.level {
        Level::Jelly(l) => {
            let mut jellies: Vec<&Jelly> = l.jellies.iter().collect();
            jellies.sort_by_key(|j| j.id);
            raw.jellies = Some(
                jellies
                    .into_iter()
                    .map(|j| RawJelly {
                        id: j.id.0,
                        colour: l.colour_label(j.colour).to_string(),
                        cells: sorted_pairs(j.cells.iter().copied()),
                        anchored: j.anchored,
                    })
                    .collect(),
            );
        }
        Level::Hanano(l) => {
            let mut blocks: Vec<&Block> = l.blocks.iter().collect();
            blocks.sort_by_key(|b| b.id);
            raw.blocks = Some(
                blocks
                    .into_iter()
                    .map(|b| {
                        let cells = sorted_pairs(b.cells.iter().copied());
                        match b.kind {
                            BlockKind::Grey => RawBlock {
                                id: b.id.0,
                                cells,
                                colour: None,
                                arrow: None,
                                bloomed: None,
                            },
                            BlockKind::Coloured {
                                colour,
                                arrow,
                                bloomed,
                            } => RawBlock {
                                id: b.id.0,
                                cells,
                                colour: Some(l.palette[colour as usize].clone()),
                                arrow: Some(arrow),
                                bloomed: Some(bloomed),
                            },
                        }
                    })
                    .collect(),
            );
            let mut flowers: Vec<&Flower> = l.flowers.iter().collect();
            flowers.sort_by_key(|f| f.cell);
            raw.flowers = Some(
                flowers
                    .into_iter()
                    .map(|f| RawFlower {
                        colour: l.palette[f.colour as usize].clone(),
                        cell: pair(f.cell),
                        on_block: match f.host {
                            Host::Terrain => None,
                            Host::Block(id) => Some(id.0),
                        },
                    })
                    .collect(),
            );
        }
    }
    raw
}

/// Canonical text: sorted keys, one top-level field per line, arrays of
/// objects one element per line, everything else compact.
pub fn canonical_json(value: &impl Serialize) -> String {
    let v = serde_json::to_value(value).expect("document serializes");
    let Value::Object(map) = v else {
        return format!("{v}\n");
    };
    let mut out = String::from("{\n");
    let n = map.len();
    for (i, (k, v)) in map.iter().enumerate() {
        let key = Value::String(k.clone());
        match v {
            Value::Array(items) if !items.is_empty() && items.iter().all(Value::is_object) => {
                let _ = writeln!(out, "  {key}: [");
                for (j, item) in items.iter().enumerate() {
                    let sep = if j + 1 < items.len() { "," } else { "" };
                    let _ = writeln!(out, "    {item}{sep}");
                }
                out.push_str("  ]");
            }
            _ => {
                let _ = write!(out, "  {key}: {v}");
            }
        }
        out.push_str(if i + 1 < n { ",\n" } else { "\n" });
    }
    out.push_str("}\n");
    out
}

pub fn serialize_level(doc: &LevelDocument) -> String {
    canonical_json(&raw_level(doc))
}

pub fn jelly_document(level: &JellyLevel) -> String {
    serialize_level(&LevelDocument::new(Level::Jelly(level.clone())))
}

pub fn hanano_document(level: &HananoLevel) -> String {
    serialize_level(&LevelDocument::new(Level::Hanano(level.clone())))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraph {
    format_version: u32,
    vertices: Vec<VertexKind>,
    edges: Vec<NclEdge>,
    rotation: Vec<Vec<EdgeId>>,
    outer_face: Vec<EdgeId>,
    /// Head vertex of every edge in the initial orientation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    heads: Option<Vec<VertexId>>,
}

/// An NCL graph with an optional initial orientation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphDocument {
    pub graph: NclGraph,
    pub initial: Option<Orientation>,
}

pub fn parse_graph(text: &str) -> Result<GraphDocument, IoError> {
    let raw: RawGraph = parse_json(text)?;
    check_version(raw.format_version)?;
    let graph = NclGraph {
        kinds: raw.vertices,
        edges: raw.edges,
        rotation: raw.rotation,
        outer_face: raw.outer_face,
    };
    graph.check().map_err(|e| IoError::Invalid(e.to_string()))?;
    let initial = match raw.heads {
        None => None,
        Some(heads) => {
            if heads.len() != graph.edge_count() {
                return Err(IoError::Invalid("one head per edge expected".into()));
            }
            for (e, h) in graph.edges.iter().zip(&heads) {
                if *h != e.u && *h != e.v {
                    return Err(IoError::Invalid(format!("head {h} is not an endpoint")));
                }
            }
            Some(Orientation::from_heads(&graph, &heads))
        }
    };
    Ok(GraphDocument { graph, initial })
}

pub fn serialize_graph(doc: &GraphDocument) -> String {
    let g = &doc.graph;
    let heads = doc.initial.as_ref().map(|o| {
        (0..g.edge_count())
            .map(|e| o.head(g, EdgeId(e)))
            .collect()
    });
    canonical_json(&RawGraph {
        format_version: FORMAT_VERSION,
        vertices: g.kinds.clone(),
        edges: g.edges.clone(),
        rotation: g.rotation.clone(),
        outer_face: g.outer_face.clone(),
        heads,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instance {
    ThreePartition(PartitionInstance),
    Abc(AbcInstance),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    format_version: u32,
    kind: InstanceKind,
    m: usize,
    #[serde(rename = "B")]
    b: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<u32>>,
    #[serde(rename = "X", default, skip_serializing_if = "Option::is_none")]
    x: Option<Vec<u32>>,
    #[serde(rename = "Y", default, skip_serializing_if = "Option::is_none")]
    y: Option<Vec<u32>>,
    #[serde(rename = "Z", default, skip_serializing_if = "Option::is_none")]
    z: Option<Vec<u32>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
enum InstanceKind {
    #[serde(rename = "3partition")]
    ThreePartition,
    #[serde(rename = "abc")]
    Abc,
}

/// Parses and validates a partition instance. Odd B is accepted here;
/// generators that need even B normalize first.
pub fn parse_instance(text: &str) -> Result<Instance, IoError> {
    let raw: RawInstance = parse_json(text)?;
    check_version(raw.format_version)?;
    let invalid = |e: crate::partition::PartitionError| IoError::Invalid(e.to_string());
    match raw.kind {
        InstanceKind::ThreePartition => {
            if raw.x.is_some() || raw.y.is_some() || raw.z.is_some() {
                return Err(IoError::Invalid("3partition instances use \"values\"".into()));
            }
            let inst = PartitionInstance::new(raw.m, raw.b, raw.values.unwrap_or_default());
            inst.validate().map_err(invalid)?;
            Ok(Instance::ThreePartition(inst))
        }
        InstanceKind::Abc => {
            if raw.values.is_some() {
                return Err(IoError::Invalid("abc instances use \"X\", \"Y\" and \"Z\"".into()));
            }
            let inst = AbcInstance {
                m: raw.m,
                b: raw.b,
                x: raw.x.unwrap_or_default(),
                y: raw.y.unwrap_or_default(),
                z: raw.z.unwrap_or_default(),
            };
            inst.validate().map_err(invalid)?;
            Ok(Instance::Abc(inst))
        }
    }
}

pub fn serialize_instance(inst: &Instance) -> String {
    let raw = match inst {
        Instance::ThreePartition(p) => RawInstance {
            format_version: FORMAT_VERSION,
            kind: InstanceKind::ThreePartition,
            m: p.m,
            b: p.b,
            values: Some(p.values.clone()),
            x: None,
            y: None,
            z: None,
        },
        Instance::Abc(a) => RawInstance {
            format_version: FORMAT_VERSION,
            kind: InstanceKind::Abc,
            m: a.m,
            b: a.b,
            values: None,
            x: Some(a.x.clone()),
            y: Some(a.y.clone()),
            z: Some(a.z.clone()),
        },
    };
    canonical_json(&raw)
}

/// A move list for either game.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Moves {
    Jelly(Vec<JellyMove>),
    Hanano(Vec<HananoAction>),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMoves {
    format_version: u32,
    game: Game,
    moves: Vec<Value>,
}

pub fn parse_moves(text: &str) -> Result<Moves, IoError> {
    let raw: RawMoves = parse_json(text)?;
    check_version(raw.format_version)?;
    fn each<T: DeserializeOwned>(vals: Vec<Value>) -> Result<Vec<T>, IoError> {
        vals.into_iter()
            .map(|v| serde_json::from_value(v).map_err(syntax))
            .collect()
    }
    Ok(match raw.game {
        Game::Jelly => Moves::Jelly(each(raw.moves)?),
        Game::Hanano => Moves::Hanano(each(raw.moves)?),
    })
}

pub fn serialize_moves(moves: &Moves) -> String {
    let to_values = |v: Vec<Value>, game| RawMoves {
        format_version: FORMAT_VERSION,
        game,
        moves: v,
    };
    let raw = match moves {
        Moves::Jelly(ms) => to_values(
            ms.iter().map(|m| serde_json::to_value(m).expect("move")).collect(),
            Game::Jelly,
        ),
        Moves::Hanano(ms) => to_values(
            ms.iter().map(|m| serde_json::to_value(m).expect("move")).collect(),
            Game::Hanano,
        ),
    };
    canonical_json(&raw)
}
