use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;
use varfam_annotate::{router, AnnotationStore, AppState, FamilySet};
use varfam_core::artifact::FamilyRecord;

fn family(id: &str, members: &[&str], cohesion: Option<f64>) -> FamilyRecord {
    let score = cohesion.map(|c| json!({"size": members.len(), "mean_cosine": c, "mean_jaccard": c, "cohesion": c}));
    serde_json::from_value(json!({
        "family_id": id,
        "mode": "strict",
        "seed": null,
        "members": members.iter().map(|t| json!({
            "token": t, "frequency": 10, "coverage": null, "top_dimension": null, "top_share": null
        })).collect::<Vec<_>>(),
        "pairs": [],
        "score": score,
        "config_echo": "0123456789abcdef",
    }))
    .unwrap()
}

struct Fixture {
    _dir: tempfile::TempDir,
    log: std::path::PathBuf,
    app: axum::Router,
}

fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("annotations.jsonl");
    let families = FamilySet::new(vec![
        family("aaaa", &["zeit", "zäit", "ziit"], Some(0.5)),
        family("bbbb", &["fillen", "fille"], Some(0.9)),
        family("cccc", &["huus", "hus", "haus", "hous"], Some(0.5)),
        family("dddd", &["mer", "mir"], None),
    ]);
    let app = router(AppState::new(families, AnnotationStore::open(&log).unwrap()));
    Fixture { _dir: dir, log, app }
}

async fn call(app: &axum::Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
    let mut request = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            request = request.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let response = app.clone().oneshot(request.body(body).unwrap()).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes)
}

async fn call_json(app: &axum::Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, bytes) = call(app, method, uri, body).await;
    (status, serde_json::from_slice(&bytes).unwrap())
}

fn ids(list: &Value) -> Vec<&str> {
    list["items"].as_array().unwrap().iter().map(|i| i["family_id"].as_str().unwrap()).collect()
}

#[tokio::test]
async fn list_sorts_by_cohesion_with_id_tiebreak() {
    let f = fixture();
    let (status, body) = call_json(&f.app, "GET", "/families", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(ids(&body), ["bbbb", "aaaa", "cccc", "dddd"]);
    assert_eq!(body["total"], 4);
    assert_eq!(body["progress"], json!({"annotated": 0, "total": 4}));

    let (_, body) = call_json(&f.app, "GET", "/families?sort=size&order=asc", None).await;
    assert_eq!(ids(&body), ["bbbb", "dddd", "aaaa", "cccc"]);
    let (_, body) = call_json(&f.app, "GET", "/families?sort=family_id&order=desc", None).await;
    assert_eq!(ids(&body), ["dddd", "cccc", "bbbb", "aaaa"]);
}

#[tokio::test]
async fn list_pages() {
    let f = fixture();
    let (_, body) = call_json(&f.app, "GET", "/families?page=2&page_size=3", None).await;
    assert_eq!(ids(&body), ["dddd"]);
    assert_eq!(body["page"], 2);
    assert_eq!(body["page_size"], 3);
    let (_, body) = call_json(&f.app, "GET", "/families?page=9", None).await;
    assert!(ids(&body).is_empty());
}

#[tokio::test]
async fn list_rejects_bad_parameters() {
    let f = fixture();
    for uri in [
        "/families?sort=alpha",
        "/families?order=up",
        "/families?page=0",
        "/families?page_size=501",
        "/families?status=done",
        "/families?category=regional",
        "/families?colour=red",
    ] {
        let (status, body) = call_json(&f.app, "GET", uri, None).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{uri}");
        assert!(body["error"].is_string(), "{uri}");
    }
}

#[tokio::test]
async fn annotate_then_filter_and_fetch() {
    let f = fixture();
    let (status, stored) = call_json(
        &f.app,
        "PUT",
        "/families/aaaa/annotation",
        Some(json!({"categories": ["Orthographic", "Regional"], "note": "ä/ei", "annotator": "rb"})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(stored["categories"], json!(["Orthographic", "Regional"]));
    assert!(chrono::DateTime::parse_from_rfc3339(stored["timestamp"].as_str().unwrap()).is_ok());

    let (_, body) = call_json(&f.app, "GET", "/families?status=annotated", None).await;
    assert_eq!(ids(&body), ["aaaa"]);
    assert_eq!(body["progress"], json!({"annotated": 1, "total": 4}));
    let (_, body) = call_json(&f.app, "GET", "/families?status=unannotated", None).await;
    assert_eq!(ids(&body), ["bbbb", "cccc", "dddd"]);
    let (_, body) = call_json(&f.app, "GET", "/families?category=Regional", None).await;
    assert_eq!(ids(&body), ["aaaa"]);
    let (_, body) = call_json(&f.app, "GET", "/families?category=Lexical", None).await;
    assert!(ids(&body).is_empty());

    let (status, body) = call_json(&f.app, "GET", "/families/aaaa", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["family"]["members"][1]["token"], "zäit");
    assert_eq!(body["annotation"]["note"], "ä/ei");
    let (_, body) = call_json(&f.app, "GET", "/families/bbbb", None).await;
    assert!(body["annotation"].is_null());
}

#[tokio::test]
async fn invalid_annotations_are_rejected() {
    let f = fixture();
    let cases = [
        json!({"categories": []}),
        json!({"categories": ["Lexical", "Other", "Regional", "Collocation"]}),
        json!({"categories": ["Other", "Other"]}),
        json!({"categories": ["lexical"]}),
    ];
    for body in cases {
        let (status, reply) = call_json(&f.app, "PUT", "/families/aaaa/annotation", Some(body.clone())).await;
        assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{body}");
        assert!(reply["error"].is_string());
    }
    let (status, _) = call_json(&f.app, "PUT", "/families/aaaa/annotation", Some(json!({"cats": []}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call_json(
        &f.app,
        "PUT",
        "/families/aaaa/annotation",
        Some(json!({"family_id": "bbbb", "categories": ["Other"]})),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call_json(&f.app, "PUT", "/families/zzzz/annotation", Some(json!({"categories": ["Other"]}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call_json(&f.app, "GET", "/families/zzzz", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    // Nothing was written.
    assert_eq!(std::fs::read_to_string(&f.log).unwrap(), "");
}

#[tokio::test]
async fn summary_counts_every_label() {
    let f = fixture();
    for (id, cats) in [
        ("aaaa", json!(["Orthographic", "Lexical"])),
        ("bbbb", json!(["Orthographic"])),
        ("cccc", json!(["Other"])),
    ] {
        let (status, _) = call_json(&f.app, "PUT", &format!("/families/{id}/annotation"), Some(json!({"categories": cats}))).await;
        assert_eq!(status, StatusCode::OK);
    }
    let (_, body) = call_json(&f.app, "GET", "/summary/categories", None).await;
    assert_eq!(
        body,
        json!({"Orthographic": 2, "Morphological": 0, "Lexical": 1, "Collocation": 0,
               "Tokenisation": 0, "Regional": 0, "Other": 1})
    );
}

#[tokio::test]
async fn export_round_trips_through_a_fresh_store() {
    let f = fixture();
    call_json(&f.app, "PUT", "/families/bbbb/annotation", Some(json!({"categories": ["Morphological"], "note": "a, \"b\""}))).await;
    call_json(&f.app, "PUT", "/families/aaaa/annotation", Some(json!({"categories": ["Lexical"]}))).await;
    call_json(&f.app, "PUT", "/families/aaaa/annotation", Some(json!({"categories": ["Regional"]}))).await;

    let (status, jsonl) = call(&f.app, "GET", "/export?format=jsonl", None).await;
    assert_eq!(status, StatusCode::OK);
    let dir = tempfile::tempdir().unwrap();
    let export = dir.path().join("export.jsonl");
    std::fs::write(&export, &jsonl).unwrap();
    let mut fresh = AnnotationStore::open(&dir.path().join("fresh.jsonl")).unwrap();
    assert_eq!(fresh.import_jsonl(&export).unwrap(), 2);
    assert_eq!(fresh.export_jsonl(), jsonl);
    assert_eq!(fresh.get("aaaa").unwrap().categories, [varfam_annotate::Category::Regional]);

    let (status, csv) = call(&f.app, "GET", "/export?format=csv", None).await;
    assert_eq!(status, StatusCode::OK);
    let mut reader = csv::Reader::from_reader(csv.as_slice());
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(&rows[1][0], "bbbb");
    assert_eq!(&rows[1][2], "a, \"b\"");

    let (status, _) = call(&f.app, "GET", "/export?format=xml", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn annotations_survive_restart() {
    let f = fixture();
    call_json(&f.app, "PUT", "/families/cccc/annotation", Some(json!({"categories": ["Tokenisation"]}))).await;
    drop(f.app);
    let store = AnnotationStore::open(&f.log).unwrap();
    let app = router(AppState::new(FamilySet::new(vec![family("cccc", &["hus", "huus"], None)]), store));
    let (_, body) = call_json(&app, "GET", "/families/cccc", None).await;
    assert_eq!(body["annotation"]["categories"], json!(["Tokenisation"]));
    let (_, body) = call_json(&app, "GET", "/health", None).await;
    assert_eq!(body["status"], "ok");
}
