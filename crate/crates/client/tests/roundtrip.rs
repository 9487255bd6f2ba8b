use std::sync::Arc;

use planminer_client::{ChoiceRequest, Client, ClientError};
use planminer_service::{serve, AppState};
use serde_json::json;
use tokio::net::TcpListener;

fn data(name: &str) -> String {
    let path = format!("{}/../core/tests/data/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).unwrap()
}

async fn start() -> Client {
    let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(serve(listener, Arc::new(AppState::new())));
    Client::new(format!("http://{addr}/"))
}

fn choice(branch: usize) -> ChoiceRequest {
    ChoiceRequest {
        xor: [("xor1".to_string(), branch)].into(),
        durations: Some("fixed:1".into()),
        ..Default::default()
    }
}

#[tokio::test]
async fn drives_the_whole_loop_over_tcp() {
    let client = start().await;
    let created = client.create_session(data("log100.csv")).await.unwrap();
    assert_eq!(created["stats"]["cases"], 100);
    let id = created["session"].as_str().unwrap();

    let model = client.model(id, "0.05", true).await.unwrap();
    assert_eq!(model["gamma"], 0.05);
    assert!(client.export_dot(id, "0.05", false).await.unwrap().starts_with("digraph"));
    let variants = client.variants(id, "0.05", 10).await.unwrap();
    assert_eq!(variants["variants"][0]["selectors"], "xor1=0");

    let err = client.choose(id, &choice(1)).await.unwrap_err();
    assert_eq!(err.status(), Some(409));
    let plan = client.choose(id, &choice(0)).await.unwrap();
    assert_eq!(plan["schedule"]["makespan"], 11.0);
    assert_eq!(client.current_choice(id).await.unwrap()["selection"], plan);

    client.model(id, "0.99", false).await.unwrap();
    assert_eq!(client.current_choice(id).await.unwrap()["selection"], json!(null));
    assert_eq!(client.choose(id, &choice(0)).await.unwrap_err().status(), Some(409));
}

#[tokio::test]
async fn errors_carry_status_and_message() {
    let client = start().await;
    match client.session("missing").await {
        Err(ClientError::Api { status, message, .. }) => {
            assert_eq!(status, 404);
            assert!(message.contains("missing"));
        }
        other => panic!("unexpected {other:?}"),
    }
    assert_eq!(client.create_session("").await.unwrap_err().status(), Some(400));
    let id = client.create_session(data("table1.csv")).await.unwrap()["session"].as_str().unwrap().to_string();
    assert_eq!(client.model(&id, "2", false).await.unwrap_err().status(), Some(422));
    assert_eq!(client.rules(&id, "1/2").await.unwrap()["rules"][0]["summary"], "client = IZ → d else {b,c}");
    assert_eq!(client.tree(&id).await.unwrap()["tree"], "→(a, ×(∧(b, c), d), e)");
}
