//! HTTP service for inspecting induced variant families and recording
//! multi-label category annotations.
//!
//! Routes:
//!
//! | method | path                        |                                        |
//! |--------|-----------------------------|----------------------------------------|
//! | GET    | `/families`                 | paged, sortable, filterable list       |
//! | GET    | `/families/{id}`            | full family with its annotation        |
//! | PUT    | `/families/{id}/annotation` | store 1 to 3 categories and a note     |
//! | GET    | `/export?format=csv\|jsonl` | all current annotations                |
//! | GET    | `/summary/categories`       | multi-label count per category         |
//! | GET    | `/health`                   | liveness                               |

mod api;
mod category;
mod store;

use std::future::Future;

pub use api::{router, AppState, FamilySet};
pub use category::{Category, UnknownCategory};
pub use store::{
    parse_categories, validate_categories, AnnotationStore, FamilyAnnotation, StoreError, ValidationError,
    MAX_CATEGORIES,
};

/// Serves `state` on `listener` until `shutdown` resolves, then finishes
/// in-flight requests. Every acknowledged annotation is already on disk.
pub async fn serve(
    listener: tokio::net::TcpListener,
    state: AppState,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(state)).with_graceful_shutdown(shutdown).await
}
