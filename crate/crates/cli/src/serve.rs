use std::collections::BTreeSet;
use std::fs;
use std::net::SocketAddr;

use axum::extract::Path as UrlPath;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use clusterlens_core::data_model::parse_geometry;
use clusterlens_core::pipeline::ResultSet;

use crate::{Failure, ServeArgs};

const INDEX: &str = include_str!("../assets/index.html");
const ASSETS: &[(&str, &str, &str)] = &[
    (
        "app.js",
        "text/javascript; charset=utf-8",
        include_str!("../assets/app.js"),
    ),
    (
        "style.css",
        "text/css; charset=utf-8",
        include_str!("../assets/style.css"),
    ),
];

/// Ids present on one side only, formatted for the first `limit` entries.
pub fn id_mismatches<'a>(
    results: impl IntoIterator<Item = &'a str>,
    geometry: impl IntoIterator<Item = &'a str>,
) -> Vec<String> {
    let results: BTreeSet<&str> = results.into_iter().collect();
    let geometry: BTreeSet<&str> = geometry.into_iter().collect();
    let missing = results
        .difference(&geometry)
        .map(|id| format!("{id} (not in geometry)"));
    let extra = geometry.difference(&results).map(|id| format!("{id} (not in results)"));
    missing.chain(extra).collect()
}

fn json(bytes: &'static [u8]) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], bytes).into_response()
}

async fn asset(UrlPath(name): UrlPath<String>) -> Response {
    match ASSETS.iter().find(|(n, _, _)| *n == name) {
        Some((_, mime, body)) => ([(header::CONTENT_TYPE, *mime)], *body).into_response(),
        None => StatusCode::NOT_FOUND.into_response(),
    }
}

pub fn serve(args: ServeArgs) -> Result<(), Failure> {
    let read = |path: &std::path::Path| fs::read(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())));
    let results_bytes = read(&args.results)?;
    let geometry_bytes = read(&args.geometry)?;

    let rs = ResultSet::from_json(&results_bytes)
        .map_err(|e| Failure::input(format!("{}: invalid results file: {e}", args.results.display())))?;
    let (id_field, name_field) = rs
        .config
        .input
        .as_ref()
        .map_or(("id".to_string(), None), |i| (i.id_field.clone(), i.name_field.clone()));
    let areas = parse_geometry(&geometry_bytes, &id_field, name_field.as_deref())
        .map_err(|e| Failure::input(format!("{}: {e}", args.geometry.display())))?;
    let mismatches = id_mismatches(rs.dataset.locations.iter().map(|l| l.id.as_str()), areas.ids());
    if !mismatches.is_empty() {
        let shown: Vec<&str> = mismatches.iter().take(5).map(String::as_str).collect();
        return Err(Failure::input(format!(
            "location ids differ between {} and {} ({} mismatches): {}",
            args.results.display(),
            args.geometry.display(),
            mismatches.len(),
            shown.join(", ")
        )));
    }

    let results_bytes: &'static [u8] = Vec::leak(results_bytes);
    let geometry_bytes: &'static [u8] = Vec::leak(geometry_bytes);
    let app = Router::new()
        .route(
            "/",
            get(|| async { ([(header::CONTENT_TYPE, "text/html; charset=utf-8")], INDEX) }),
        )
        .route("/assets/{*name}", get(asset))
        .route("/api/results", get(move || async move { json(results_bytes) }))
        .route("/api/geometry", get(move || async move { json(geometry_bytes) }));

    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::runtime(e.to_string()))?;
    runtime.block_on(async move {
        let addr = SocketAddr::from(([127, 0, 0, 1], args.port));
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| Failure::input(format!("cannot listen on port {}: {e}", args.port)))?;
        let bound = listener.local_addr().map_err(|e| Failure::runtime(e.to_string()))?;
        println!("serving http://{bound}/");
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| Failure::runtime(e.to_string()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mismatches_cover_both_sides() {
        let found = id_mismatches(["a", "b", "c"], ["b", "c", "d"]);
        assert_eq!(found, ["a (not in geometry)", "d (not in results)"]);
        assert!(id_mismatches(["x"], ["x"]).is_empty());
    }
}
