use jellyhan::gadgets::Mode;
use jellyhan::grid::{Cell, Dir};
use jellyhan::hanano::HananoAction;
use jellyhan::io::*;
use jellyhan::jelly::JellyMove;
use jellyhan::ncl::{samples, EdgeId, FlipProblem, Orientation};
use jellyhan::partition::*;
use jellyhan::reduce_ncl::{ncl_to_jelly, CompileOptions};

fn jelly_text(walls: &str, jellies: &str) -> String {
    format!(
        r#"{{"format_version":1,"game":"jelly","width":4,"height":3,"walls":{walls},"palette":["red"],"jellies":{jellies}}}"#
    )
}

fn round_trips(text: &str) {
    let doc = parse_level(text).unwrap();
    let once = serialize_level(&doc);
    let again = serialize_level(&parse_level(&once).unwrap());
    assert_eq!(once, again);
    assert_eq!(parse_level(&once).unwrap(), doc);
}

#[test]
fn canonical_round_trip_is_byte_identical() {
    let text = jelly_text(
        "[[3,2],[0,2],[1,2],[2,2]]",
        r#"[{"id":1,"colour":"black","cells":[[2,1]],"anchored":false},
            {"id":0,"colour":"red","cells":[[1,1],[0,1]],"anchored":true}]"#,
    );
    round_trips(&text);
    let canon = serialize_level(&parse_level(&text).unwrap());
    assert!(canon.contains(r#""walls": [[0,2],[1,2],[2,2],[3,2]]"#), "{canon}");
    assert!(canon.find("\"anchored\"").unwrap() < canon.find("\"cells\"").unwrap());
    assert!(canon.starts_with("{\n  \"format_version\": 1,\n"));
}

#[test]
fn level_errors() {
    let overlap = jelly_text(
        "[]",
        r#"[{"id":0,"colour":"red","cells":[[0,0]],"anchored":false},
            {"id":1,"colour":"red","cells":[[0,0]],"anchored":false}]"#,
    );
    assert_eq!(parse_level(&overlap), Err(IoError::Overlap(Cell::new(0, 0))));
    let wall_overlap = jelly_text("[[1,1]]", r#"[{"id":0,"colour":"red","cells":[[1,1]],"anchored":false}]"#);
    assert_eq!(parse_level(&wall_overlap), Err(IoError::Overlap(Cell::new(1, 1))));
    let split = jelly_text("[]", r#"[{"id":4,"colour":"red","cells":[[0,0],[2,0]],"anchored":false}]"#);
    assert_eq!(parse_level(&split), Err(IoError::DisconnectedJelly(4)));
    let bounds = jelly_text("[]", r#"[{"id":0,"colour":"red","cells":[[4,0]],"anchored":false}]"#);
    assert_eq!(parse_level(&bounds), Err(IoError::Bounds(Cell::new(4, 0))));
    let colour = jelly_text("[]", r#"[{"id":0,"colour":"green","cells":[[0,0]],"anchored":false}]"#);
    assert_eq!(parse_level(&colour), Err(IoError::BadColour("green".into())));
    assert!(matches!(parse_level("{\"format_version\":1,"), Err(IoError::Syntax(_))));
    let extra = jelly_text("[]", "[]").replace("\"width\"", "\"colour_count\":3,\"width\"");
    assert!(matches!(parse_level(&extra), Err(IoError::Syntax(_))));
    let v2 = jelly_text("[]", "[]").replace("\"format_version\":1", "\"format_version\":2");
    assert_eq!(parse_level(&v2), Err(IoError::Version(2)));
}

#[test]
fn hanano_documents() {
    let text = r#"{"format_version":1,"game":"hanano","width":3,"height":2,"walls":[[0,1],[1,1],[2,1]],
        "palette":["red"],
        "blocks":[{"id":0,"cells":[[0,0]],"colour":"red","arrow":"up","bloomed":false},{"id":1,"cells":[[1,0]]}],
        "flowers":[{"colour":"red","cell":[2,0]}]}"#;
    round_trips(text);
    let bad_host = text.replace(r#""cell":[2,0]}"#, r#""cell":[2,0],"on_block":0}"#);
    assert!(matches!(parse_level(&bad_host), Err(IoError::Invalid(_))));
    let no_arrow = text.replace(r#","arrow":"up""#, "");
    assert!(matches!(parse_level(&no_arrow), Err(IoError::Invalid(_))));
}

fn three(m: usize, b: u32, v: &[u32]) -> PartitionInstance {
    PartitionInstance::new(m, b, v.to_vec())
}

#[test]
fn generator_outputs_parse_and_round_trip() {
    let p = three(2, 16, &[5, 5, 6, 5, 5, 6]);
    let abc = AbcInstance {
        m: 2,
        b: 10,
        x: vec![3, 3],
        y: vec![3, 4],
        z: vec![4, 3],
    };
    let docs = vec![
        jelly_document(&gen_jelly_h10(&p).unwrap()),
        jelly_document(&gen_jelly_2col_h4(&p).unwrap()),
        jelly_document(&gen_jelly_w5(&p).unwrap()),
        hanano_document(&gen_hanano_w6(&p).unwrap()),
        hanano_document(&gen_hanano_h11(&abc).unwrap()),
    ];
    for d in docs {
        assert_eq!(serialize_level(&parse_level(&d).unwrap()), d);
    }
    let g = samples::k4_or();
    let problem = FlipProblem {
        graph: g.clone(),
        initial: Orientation(vec![false; g.edge_count()]),
        target: EdgeId(0),
    };
    if problem.check().is_ok() {
        let art = ncl_to_jelly(&problem, CompileOptions::new(Mode::MultiColour)).unwrap();
        let doc = LevelDocument::new(Level::Jelly(art.level.clone())).with_meta("generator", "ncl");
        let text = serialize_level(&doc);
        assert_eq!(parse_level(&text).unwrap(), doc);
    }
}

#[test]
fn graph_instance_and_move_documents() {
    let g = samples::k4_mixed();
    let doc = GraphDocument {
        graph: g.clone(),
        initial: Some(Orientation(vec![true; g.edge_count()])),
    };
    let text = serialize_graph(&doc);
    assert_eq!(parse_graph(&text).unwrap(), doc);
    assert_eq!(serialize_graph(&parse_graph(&text).unwrap()), text);

    let inst = Instance::ThreePartition(three(2, 12, &[4; 6]));
    let text = serialize_instance(&inst);
    assert!(text.contains("\"B\": 12"));
    assert_eq!(parse_instance(&text).unwrap(), inst);
    let bad = text.replace("[4,4,4,4,4,4]", "[4,4,4,4,4,5]");
    assert!(matches!(parse_instance(&bad), Err(IoError::Invalid(_))));
    let abc = Instance::Abc(AbcInstance {
        m: 1,
        b: 10,
        x: vec![3],
        y: vec![3],
        z: vec![4],
    });
    assert_eq!(parse_instance(&serialize_instance(&abc)).unwrap(), abc);

    let moves = Moves::Jelly(vec![JellyMove::new(3, Dir::Left), JellyMove::new(0, Dir::Right)]);
    assert_eq!(parse_moves(&serialize_moves(&moves)).unwrap(), moves);
    let actions = Moves::Hanano(vec![
        HananoAction::Shift {
            block: jellyhan::hanano::BlockId(1),
            dir: Dir::Right,
        },
        HananoAction::Swap {
            a: jellyhan::hanano::BlockId(0),
            b: jellyhan::hanano::BlockId(1),
        },
    ]);
    assert_eq!(parse_moves(&serialize_moves(&actions)).unwrap(), actions);
}
