import type { SceneModel } from "./scene.js";
import { parseSnapshot, type Command, type Snapshot, type Topology } from "./types.js";

/**
 * The slice of the WebSocket API the client needs. Browser sockets satisfy
 * it natively; tests inject fakes and the scripted round-trip test injects
 * a Node implementation through the same factory.
 */
export interface SocketLike {
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  readyState: number;
  send(data: string): void;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;

const OPEN = 1;

const nativeFactory: SocketFactory = (url) => {
  const ctor = (globalThis as { WebSocket?: new (u: string) => SocketLike }).WebSocket;
  if (!ctor) throw new Error("no WebSocket implementation available");
  return new ctor(url);
};

export type ConnectionState = "connecting" | "open" | "closed";

export interface ClientOptions {
  factory?: SocketFactory;
  baseDelayMs?: number; // first reconnect delay, doubles per attempt
  maxDelayMs?: number;
}

/**
 * Streams snapshots from the service into a SceneModel and sends commands
 * back. Reconnects with exponential backoff after a drop; the model (and
 * its monotone frame counter) survives reconnects, so a replayed or
 * out-of-order frame after resume is discarded rather than rendered.
 */
export class TwinClient {
  readonly model: SceneModel;
  onSnapshot: ((snap: Snapshot, model: SceneModel) => void) | null = null;
  onState: ((state: ConnectionState) => void) | null = null;
  onServerError: ((message: string) => void) | null = null;

  private readonly url: string;
  private readonly factory: SocketFactory;
  private readonly baseDelayMs: number;
  private readonly maxDelayMs: number;
  private sock: SocketLike | null = null;
  private attempts = 0;
  private stopped = false;

  constructor(url: string, model: SceneModel, opts: ClientOptions = {}) {
    this.url = url;
    this.model = model;
    this.factory = opts.factory ?? nativeFactory;
    this.baseDelayMs = opts.baseDelayMs ?? 250;
    this.maxDelayMs = opts.maxDelayMs ?? 4000;
  }

  connect(): void {
    if (this.stopped) return;
    this.onState?.("connecting");
    const sock = this.factory(this.url);
    this.sock = sock;
    sock.onopen = () => {
      this.attempts = 0;
      this.onState?.("open");
    };
    sock.onmessage = (ev) => this.handleMessage(ev.data);
    sock.onerror = () => {
      // the matching close event drives the reconnect
    };
    sock.onclose = () => {
      if (this.sock !== sock) return;
      this.sock = null;
      this.scheduleReconnect();
    };
  }

  /** True when the command went out on an open socket. */
  send(cmd: Command): boolean {
    if (this.sock === null || this.sock.readyState !== OPEN) return false;
    this.sock.send(JSON.stringify(cmd));
    return true;
  }

  close(): void {
    this.stopped = true;
    const sock = this.sock;
    this.sock = null;
    sock?.close();
  }

  private scheduleReconnect(): void {
    if (this.stopped) return;
    this.onState?.("closed");
    const delay = Math.min(this.baseDelayMs * 2 ** this.attempts, this.maxDelayMs);
    this.attempts += 1;
    setTimeout(() => this.connect(), delay);
  }

  private handleMessage(data: unknown): void {
    if (typeof data !== "string") return;
    let raw: unknown;
    try {
      raw = JSON.parse(data);
    } catch {
      console.warn("dropping non-JSON message from server");
      return;
    }
    const head = raw as { type?: unknown; message?: unknown };
    if (head.type === "hello") return;
    if (head.type === "error") {
      this.onServerError?.(String(head.message));
      return;
    }
    const snap = parseSnapshot(raw, this.model.topology);
    if (snap !== null && this.model.apply(snap)) {
      this.onSnapshot?.(snap, this.model);
    }
  }
}

/** Fetch the static scene description served next to the socket. */
export async function fetchTopology(baseUrl: string): Promise<Topology> {
  const res = await fetch(new URL("/scene", baseUrl));
  if (!res.ok) throw new Error(`scene request failed with status ${res.status}`);
  return (await res.json()) as Topology;
}
