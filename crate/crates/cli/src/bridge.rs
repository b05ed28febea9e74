//! WebSocket bridge to dashboard clients.
//!
//! Session events fan out to one bounded queue per client. Publishing never
//! waits: a client whose queue is full is disconnected.

use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::{mpsc as std_mpsc, Arc, Mutex};
use std::time::Duration;

use axum::extract::ws::{Message, Utf8Bytes, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::Router;
use futures::{SinkExt, StreamExt};
use serde_json::Value;
use tobe_core::session::{ControlReply, ControlRequest, SessionEvent};
use tokio::net::TcpListener;
use tokio::sync::{mpsc, oneshot, Notify};
use tokio::task::JoinHandle;

use crate::message::BridgeMessage;

/// Messages buffered per client before it counts as too slow.
pub const CLIENT_QUEUE: usize = 256;

const CONTROL_TIMEOUT: Duration = Duration::from_secs(5);

struct Client {
    id: u64,
    tx: mpsc::Sender<Utf8Bytes>,
    kick: Arc<Notify>,
}

struct Hub {
    clients: Mutex<Vec<Client>>,
    next_id: AtomicU64,
    connected: AtomicUsize,
    dropped: AtomicU64,
    /// Latest session time published, as f64 bits.
    now: AtomicU64,
    control: Mutex<Option<std_mpsc::Sender<ControlRequest>>>,
}

impl Hub {
    fn offer(&self, text: Utf8Bytes) {
        let mut clients = self.clients.lock().unwrap();
        clients.retain(|c| match c.tx.try_send(text.clone()) {
            Ok(()) => true,
            Err(mpsc::error::TrySendError::Full(_)) => {
                log::warn!("bridge client {} fell {CLIENT_QUEUE} messages behind; disconnecting", c.id);
                self.dropped.fetch_add(1, Ordering::Relaxed);
                c.kick.notify_one();
                false
            }
            Err(mpsc::error::TrySendError::Closed(_)) => false,
        });
    }

    fn now(&self) -> f64 {
        f64::from_bits(self.now.load(Ordering::Relaxed))
    }
}

pub struct Bridge {
    hub: Arc<Hub>,
    addr: SocketAddr,
    stop: Option<oneshot::Sender<()>>,
    server: JoinHandle<()>,
}

impl Bridge {
    /// Serves `/ws` on `addr`. Control messages go to `control`, when given.
    pub async fn bind(addr: SocketAddr, control: Option<std_mpsc::Sender<ControlRequest>>) -> std::io::Result<Bridge> {
        let listener = TcpListener::bind(addr).await?;
        let addr = listener.local_addr()?;
        let hub = Arc::new(Hub {
            clients: Mutex::new(Vec::new()),
            next_id: AtomicU64::new(1),
            connected: AtomicUsize::new(0),
            dropped: AtomicU64::new(0),
            now: AtomicU64::new(0f64.to_bits()),
            control: Mutex::new(control),
        });
        let app = Router::new().route("/ws", get(upgrade)).with_state(hub.clone());
        let (stop, stopped) = oneshot::channel::<()>();
        let server = tokio::spawn(async move {
            let res = axum::serve(listener, app)
                .with_graceful_shutdown(async {
                    let _ = stopped.await;
                })
                .await;
            if let Err(e) = res {
                log::error!("bridge server failed: {e}");
            }
        });
        Ok(Bridge { hub, addr, stop: Some(stop), server })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Open client connections.
    pub fn clients(&self) -> usize {
        self.hub.connected.load(Ordering::Relaxed)
    }

    /// Clients disconnected for falling behind.
    pub fn dropped(&self) -> u64 {
        self.hub.dropped.load(Ordering::Relaxed)
    }

    /// Queues `msg` for every client. Never blocks.
    pub fn publish(&self, msg: &BridgeMessage) {
        if let Some(t) = message_time(msg) {
            self.hub.now.store(t.to_bits(), Ordering::Relaxed);
        }
        let text = serde_json::to_string(msg).expect("bridge messages serialize");
        self.hub.offer(Utf8Bytes::from(text));
    }

    pub fn publish_event(&self, e: &SessionEvent) {
        self.hub.now.store(e.t.to_bits(), Ordering::Relaxed);
        if let Some(msg) = BridgeMessage::from_event(e) {
            self.publish(&msg);
        }
    }

    /// Stops accepting control messages, lets clients drain their queues
    /// for up to `linger`, then closes the server.
    pub async fn shutdown(mut self, linger: Duration) {
        self.hub.control.lock().unwrap().take();
        self.hub.clients.lock().unwrap().clear();
        let deadline = tokio::time::Instant::now() + linger;
        while self.clients() > 0 && tokio::time::Instant::now() < deadline {
            tokio::time::sleep(Duration::from_millis(10)).await;
        }
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        let _ = tokio::time::timeout(Duration::from_millis(200), &mut self.server).await;
        self.server.abort();
    }
}

fn message_time(msg: &BridgeMessage) -> Option<f64> {
    match msg {
        BridgeMessage::Metric { t, .. }
        | BridgeMessage::Render { t, .. }
        | BridgeMessage::Protocol { t, .. }
        | BridgeMessage::Gauge { t, .. } => Some(*t),
        _ => None,
    }
}

async fn upgrade(ws: WebSocketUpgrade, State(hub): State<Arc<Hub>>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| serve_client(socket, hub))
}

async fn serve_client(socket: WebSocket, hub: Arc<Hub>) {
    let (tx, mut rx) = mpsc::channel::<Utf8Bytes>(CLIENT_QUEUE);
    let kick = Arc::new(Notify::new());
    let id = hub.next_id.fetch_add(1, Ordering::Relaxed);
    // acks go through a weak handle so dropping the hub's sender ends the writer
    let replies = tx.downgrade();
    hub.clients.lock().unwrap().push(Client { id, tx, kick: kick.clone() });
    hub.connected.fetch_add(1, Ordering::Relaxed);
    log::info!("bridge client {id} connected");

    let (mut sink, mut stream) = socket.split();
    let writer = async {
        while let Some(text) = rx.recv().await {
            if sink.send(Message::Text(text)).await.is_err() {
                return;
            }
        }
        let _ = sink.send(Message::Close(None)).await;
    };
    let reader = async {
        while let Some(Ok(msg)) = stream.next().await {
            match msg {
                Message::Text(text) => {
                    let ack = handle_control(&hub, text.as_str()).await;
                    let Some(tx) = replies.upgrade() else { return };
                    let text = serde_json::to_string(&ack).expect("acks serialize");
                    if tx.try_send(Utf8Bytes::from(text)).is_err() {
                        kick.notify_one();
                    }
                }
                Message::Close(_) => return,
                _ => {}
            }
        }
    };
    tokio::select! {
        _ = writer => {}
        _ = reader => {}
        _ = kick.notified() => {}
    }
    hub.clients.lock().unwrap().retain(|c| c.id != id);
    hub.connected.fetch_sub(1, Ordering::Relaxed);
    log::info!("bridge client {id} disconnected");
}

async fn handle_control(hub: &Hub, text: &str) -> BridgeMessage {
    let ack = |id: Value, reply: ControlReply| match reply {
        Ok(result) => BridgeMessage::Ack { t: hub.now(), id, ok: true, error: None, result: Some(result) },
        Err(error) => BridgeMessage::Ack { t: hub.now(), id, ok: false, error: Some(error), result: None },
    };
    let msg: BridgeMessage = match serde_json::from_str(text) {
        Ok(m) => m,
        Err(e) => {
            // still echo the id when the envelope is readable
            let id = serde_json::from_str::<Value>(text).ok().and_then(|v| v.get("id").cloned()).unwrap_or(Value::Null);
            return ack(id, Err(format!("malformed message: {e}")));
        }
    };
    let (id, command) = match msg.into_control() {
        Ok(c) => c,
        Err(e) => return ack(Value::Null, Err(e)),
    };
    let Some(control) = hub.control.lock().unwrap().clone() else {
        return ack(id, Err("no session is running".into()));
    };
    let (req, reply) = ControlRequest::new(command);
    if control.send(req).is_err() {
        return ack(id, Err("session has ended".into()));
    }
    let reply = tokio::task::spawn_blocking(move || reply.recv_timeout(CONTROL_TIMEOUT))
        .await
        .map_err(|e| e.to_string())
        .and_then(|r| r.map_err(|_| "session did not answer".to_string()));
    match reply {
        Ok(r) => ack(id, r),
        Err(e) => ack(id, Err(e)),
    }
}
