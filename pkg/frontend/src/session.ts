/** Collaboration session client.
 *
 * Local edits never mutate the replica directly: they go to the server as
 * update messages and take effect when the state broadcast echoes back
 * (the server is authoritative). Broadcasts are folded with the shared
 * applyUpdate semantics; a version gap triggers a fresh snapshot request.
 */

import type { Catalog, SessionState } from "./model.js";
import { applyUpdate } from "./state.js";

/** Subset of the WebSocket API used here; satisfied by browsers and `ws`. */
export interface SocketLike {
  send(data: string): void;
  close(): void;
  addEventListener(type: "open" | "message" | "close", listener: (event: never) => void): void;
}

export type SocketFactory = (url: string) => SocketLike;

export interface SessionEvents {
  /** Fired after the replica changed; path is null for snapshot resets. */
  onState?: (state: SessionState, version: number, path: string | null) => void;
  onSessionId?: (sessionId: string) => void;
  onServerError?: (code: string, message: string) => void;
  onClose?: () => void;
}

export const CAMERA_UPDATE_MIN_INTERVAL_MS = 1000 / 15;

export class SessionClient {
  state: SessionState | null = null;
  version = -1;
  sessionId: string | null = null;

  private socket: SocketLike | null = null;
  private lastCameraSend = 0;
  private pendingCamera: Map<string, unknown> = new Map();
  private cameraTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private url: string,
    private catalog: Catalog | null,
    private events: SessionEvents = {},
    private socketFactory: SocketFactory = (u) => new WebSocket(u) as unknown as SocketLike,
  ) {}

  connect(): Promise<void> {
    return new Promise((resolve, reject) => {
      let settled = false;
      const socket = this.socketFactory(this.url);
      this.socket = socket;
      socket.addEventListener("open", () => {
        settled = true;
        resolve();
      });
      socket.addEventListener("message", ((event: { data: unknown }) => {
        this.handleMessage(String(event.data));
      }) as never);
      socket.addEventListener("close", () => {
        this.socket = null;
        if (!settled) reject(new Error("socket closed before opening"));
        this.events.onClose?.();
      });
    });
  }

  close(): void {
    if (this.cameraTimer !== null) clearTimeout(this.cameraTimer);
    this.socket?.close();
    this.socket = null;
  }

  createSession(): void {
    this.send({ type: "create_session" });
  }

  join(sessionId: string): void {
    this.send({ type: "join", session_id: sessionId });
  }

  /** Send a state edit; the replica changes when the broadcast comes back. */
  update(path: string, value: unknown): void {
    this.send({ type: "update", path, value });
  }

  /** Camera edits are throttled client-side to at most 15 messages/s,
   * keeping only the latest value per path. */
  updateCamera(path: string, value: unknown): void {
    this.pendingCamera.set(path, value);
    const now = Date.now();
    const due = this.lastCameraSend + CAMERA_UPDATE_MIN_INTERVAL_MS;
    if (now >= due) {
      this.flushCamera();
    } else if (this.cameraTimer === null) {
      this.cameraTimer = setTimeout(() => {
        this.cameraTimer = null;
        this.flushCamera();
      }, due - now);
    }
  }

  private flushCamera(): void {
    this.lastCameraSend = Date.now();
    for (const [path, value] of this.pendingCamera) this.update(path, value);
    this.pendingCamera.clear();
  }

  private send(message: Record<string, unknown>): void {
    if (!this.socket) throw new Error("session socket is not connected");
    this.socket.send(JSON.stringify(message));
  }

  private handleMessage(raw: string): void {
    let message: Record<string, unknown>;
    try {
      message = JSON.parse(raw) as Record<string, unknown>;
    } catch {
      return;
    }
    switch (message.type) {
      case "session_created":
        this.sessionId = message.session_id as string;
        this.events.onSessionId?.(this.sessionId);
        break;
      case "snapshot":
        this.state = message.state as SessionState;
        this.version = message.version as number;
        this.events.onState?.(this.state, this.version, null);
        break;
      case "state": {
        const version = message.version as number;
        if (this.state === null) break;
        if (version !== this.version + 1) {
          // gap: somebody's broadcast went missing; resync from a snapshot
          if (this.sessionId) this.join(this.sessionId);
          break;
        }
        this.state = applyUpdate(
          this.state,
          message.path as string,
          message.value,
          this.catalog,
        );
        this.version = version;
        this.events.onState?.(this.state, version, message.path as string);
        break;
      }
      case "error":
        if (message.code === "no_such_session") this.sessionId = null;
        this.events.onServerError?.(String(message.code), String(message.message ?? ""));
        break;
      case "ping":
        this.send({ type: "pong" });
        break;
      default:
        break;
    }
  }
}

/** Session id carried in the URL hash for shareable join links. */
export function sessionIdFromHash(hash: string): string | null {
  const match = /#session=([A-Z0-9]{6})/.exec(hash);
  return match ? match[1] : null;
}

export function hashForSession(sessionId: string): string {
  return `#session=${sessionId}`;
}
