//! Serve-mode session store and its JSON wire protocol.
//!
//! Every request is a POST whose body is a JSON object; every response is a
//! JSON object carrying `format_version`. Routes:
//!
//! - `/create` `{"level": <level document>}` or `{}` for the server's level
//! - `/state` `{"session": id}`
//! - `/move` `{"session": id, "move": <move>}`
//! - `/reset` `{"session": id}`
//! - `/undo` `{"session": id}` replays the history minus its last move
//! - `/hint` `{"session": id, "max_states": n}` runs a bounded solve
//!
//! A successful response holds the session id, the current state as a level
//! document, the won flag and the number of moves played. Errors hold
//! `error` (`UnknownSession`, `IllegalMove`, `EngineMismatch`, `BadRequest`)
//! and `reason`, and never change the session.

use std::collections::BTreeMap;

use jellyhan::hanano::{HananoAction, HananoState};
use jellyhan::io::{parse_level, serialize_level, Level, LevelDocument, FORMAT_VERSION};
use jellyhan::jelly::{JellyMove, JellyState};
use jellyhan::solver::{replay, solve, GameState, SearchLimits, SearchOutcome, Strategy};
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ApiError {
    UnknownSession(u64),
    IllegalMove(String),
    EngineMismatch(String),
    BadRequest(String),
}

impl ApiError {
    pub fn status(&self) -> u16 {
        match self {
            ApiError::UnknownSession(_) => 404,
            ApiError::IllegalMove(_) => 409,
            ApiError::EngineMismatch(_) => 422,
            ApiError::BadRequest(_) => 400,
        }
    }

    fn body(&self) -> Value {
        let (name, reason) = match self {
            ApiError::UnknownSession(id) => ("UnknownSession", format!("no session {id}")),
            ApiError::IllegalMove(r) => ("IllegalMove", r.clone()),
            ApiError::EngineMismatch(r) => ("EngineMismatch", r.clone()),
            ApiError::BadRequest(r) => ("BadRequest", r.clone()),
        };
        json!({"format_version": FORMAT_VERSION, "error": name, "reason": reason})
    }
}

trait Engine: GameState {
    fn document(&self, palette: &[String]) -> Level;
}

impl Engine for JellyState {
    fn document(&self, palette: &[String]) -> Level {
        Level::Jelly(self.to_level(palette))
    }
}

impl Engine for HananoState {
    fn document(&self, palette: &[String]) -> Level {
        Level::Hanano(self.to_level(palette))
    }
}

struct Play<S: GameState> {
    palette: Vec<String>,
    start: S,
    current: S,
    history: Vec<S::Move>,
}

impl<S: Engine> Play<S>
where
    S::Move: serde::de::DeserializeOwned + serde::Serialize,
{
    fn new(palette: Vec<String>, start: S) -> Self {
        Play {
            palette,
            current: start.clone(),
            start,
            history: Vec::new(),
        }
    }

    fn state_json(&self) -> Value {
        let text = serialize_level(&LevelDocument::new(self.current.document(&self.palette)));
        serde_json::from_str(&text).expect("canonical document is JSON")
    }

    fn act(&mut self, mv: S::Move) -> Result<(), ApiError> {
        let next = self
            .current
            .apply(mv)
            .map_err(|e| ApiError::IllegalMove(format!("{mv}: {e}")))?;
        self.current = next;
        self.history.push(mv);
        Ok(())
    }

    fn reset(&mut self) {
        self.current = self.start.clone();
        self.history.clear();
    }

    fn undo(&mut self) -> Result<(), ApiError> {
        if self.history.pop().is_none() {
            return Err(ApiError::IllegalMove("no move to take back".into()));
        }
        self.current = replay(&self.start, &self.history).expect("history replays");
        Ok(())
    }

    fn hint(&self, max_states: usize) -> Value {
        match solve(&self.current, &SearchLimits::with_max_states(max_states), Strategy::Bfs) {
            SearchOutcome::Solved { plan, explored } => json!({
                "verdict": "solved",
                "hint": plan.first().map(|m| serde_json::to_value(m).expect("move")),
                "plan_length": plan.len(),
                "explored": explored,
            }),
            SearchOutcome::Unsolvable { explored } => {
                json!({"verdict": "unsolvable", "hint": null, "explored": explored})
            }
            SearchOutcome::LimitReached { explored } => {
                json!({"verdict": "limit_reached", "hint": null, "explored": explored})
            }
        }
    }
}

enum Session {
    Jelly(Play<JellyState>),
    Hanano(Play<HananoState>),
}

macro_rules! with_play {
    ($s:expr, $p:ident => $body:expr) => {
        match $s {
            Session::Jelly($p) => $body,
            Session::Hanano($p) => $body,
        }
    };
}

impl Session {
    fn from_document(doc: &LevelDocument) -> Result<Session, ApiError> {
        let bad = |e: String| ApiError::BadRequest(e);
        Ok(match &doc.level {
            Level::Jelly(l) => Session::Jelly(Play::new(
                l.palette.clone(),
                l.start().map_err(|e| bad(e.to_string()))?,
            )),
            Level::Hanano(l) => Session::Hanano(Play::new(
                l.palette.clone(),
                l.start().map_err(|e| bad(e.to_string()))?,
            )),
        })
    }

    fn act(&mut self, mv: &Value) -> Result<(), ApiError> {
        match self {
            Session::Jelly(p) => match serde_json::from_value::<JellyMove>(mv.clone()) {
                Ok(m) => p.act(m),
                Err(e) => Err(mismatch::<HananoAction>(mv, "jelly", e)),
            },
            Session::Hanano(p) => match serde_json::from_value::<HananoAction>(mv.clone()) {
                Ok(m) => p.act(m),
                Err(e) => Err(mismatch::<JellyMove>(mv, "hanano", e)),
            },
        }
    }
}

/// EngineMismatch when `mv` is a well-formed move of the other game.
fn mismatch<Other: serde::de::DeserializeOwned>(
    mv: &Value,
    game: &str,
    err: serde_json::Error,
) -> ApiError {
    if serde_json::from_value::<Other>(mv.clone()).is_ok() {
        ApiError::EngineMismatch(format!("move {mv} is not a {game} move"))
    } else {
        ApiError::BadRequest(format!("malformed move: {err}"))
    }
}

/// All sessions of one server. Requests are handled one at a time, so
/// actions on a session apply in arrival order.
pub struct SessionStore {
    next_id: u64,
    sessions: BTreeMap<u64, Session>,
    default_level: Option<LevelDocument>,
}

const DEFAULT_HINT_STATES: usize = 200_000;

impl SessionStore {
    pub fn new(default_level: Option<LevelDocument>) -> Self {
        SessionStore {
            next_id: 1,
            sessions: BTreeMap::new(),
            default_level,
        }
    }

    fn session(&mut self, body: &Map<String, Value>) -> Result<(u64, &mut Session), ApiError> {
        let id = body
            .get("session")
            .and_then(Value::as_u64)
            .ok_or_else(|| ApiError::BadRequest("missing \"session\"".into()))?;
        let s = self
            .sessions
            .get_mut(&id)
            .ok_or(ApiError::UnknownSession(id))?;
        Ok((id, s))
    }

    fn view(id: u64, s: &Session) -> Value {
        let (state, won, moves) = with_play!(s, p => (p.state_json(), p.current.is_won(), p.history.len()));
        json!({
            "format_version": FORMAT_VERSION,
            "session": id,
            "state": state,
            "won": won,
            "moves": moves,
        })
    }

    /// Dispatches one request; returns the HTTP status and JSON body.
    pub fn handle(&mut self, path: &str, body: &str) -> (u16, Value) {
        match self.route(path, body) {
            Ok(v) => (200, v),
            Err(e) => (e.status(), e.body()),
        }
    }

    fn route(&mut self, path: &str, body: &str) -> Result<Value, ApiError> {
        let body: Map<String, Value> = if body.trim().is_empty() {
            Map::new()
        } else {
            serde_json::from_str(body).map_err(|e| ApiError::BadRequest(e.to_string()))?
        };
        match path {
            "/create" => {
                let doc = match body.get("level") {
                    Some(level) => parse_level(&level.to_string())
                        .map_err(|e| ApiError::BadRequest(e.to_string()))?,
                    None => self
                        .default_level
                        .clone()
                        .ok_or_else(|| ApiError::BadRequest("no level given and no default".into()))?,
                };
                let session = Session::from_document(&doc)?;
                let id = self.next_id;
                self.next_id += 1;
                let view = Self::view(id, &session);
                self.sessions.insert(id, session);
                Ok(view)
            }
            "/state" => {
                let (id, s) = self.session(&body)?;
                Ok(Self::view(id, s))
            }
            "/move" => {
                let mv = body
                    .get("move")
                    .cloned()
                    .ok_or_else(|| ApiError::BadRequest("missing \"move\"".into()))?;
                let (id, s) = self.session(&body)?;
                s.act(&mv)?;
                Ok(Self::view(id, s))
            }
            "/reset" => {
                let (id, s) = self.session(&body)?;
                with_play!(s, p => p.reset());
                Ok(Self::view(id, s))
            }
            "/undo" => {
                let (id, s) = self.session(&body)?;
                with_play!(s, p => p.undo())?;
                Ok(Self::view(id, s))
            }
            "/hint" => {
                let max = body
                    .get("max_states")
                    .and_then(Value::as_u64)
                    .map_or(DEFAULT_HINT_STATES, |n| n as usize);
                let (id, s) = self.session(&body)?;
                let mut out = with_play!(s, p => p.hint(max));
                out["session"] = json!(id);
                out["format_version"] = json!(FORMAT_VERSION);
                Ok(out)
            }
            other => Err(ApiError::BadRequest(format!("unknown route {other}"))),
        }
    }
}

/// Answers requests until the server shuts down.
pub fn serve_on(server: &tiny_http::Server, store: &mut SessionStore) {
    for mut req in server.incoming_requests() {
        let mut body = String::new();
        let (status, value) = if *req.method() != tiny_http::Method::Post {
            let e = ApiError::BadRequest("every route takes POST".into());
            (e.status(), e.body())
        } else if let Err(e) = req.as_reader().read_to_string(&mut body) {
            let e = ApiError::BadRequest(e.to_string());
            (e.status(), e.body())
        } else {
            let path = req.url().split('?').next().unwrap_or("").to_string();
            store.handle(&path, &body)
        };
        let header = tiny_http::Header::from_bytes("Content-Type", "application/json")
            .expect("static header");
        let resp = tiny_http::Response::from_string(value.to_string())
            .with_status_code(status)
            .with_header(header);
        let _ = req.respond(resp);
    }
}
