// Websocket client for the bridge: topic subscriptions plus promise-based
// service calls with correlation ids. The UI holds no authoritative state;
// everything flows through these frames.

import type { BridgeFrame, Json } from './protocol.js';

type MessageHandler = (msg: Record<string, Json>) => void;
type StatusHandler = (frame: BridgeFrame) => void;

interface SocketLike {
  send(data: string): void;
  close(): void;
  addEventListener(type: string, listener: (event: any) => void): void;
}

type SocketFactory = (url: string) => SocketLike;

const defaultFactory: SocketFactory = (url) =>
  new (globalThis as any).WebSocket(url) as SocketLike;

export class BridgeClient {
  private socket: SocketLike | null = null;
  private handlers = new Map<string, MessageHandler[]>();
  private pending = new Map<
    string,
    { resolve: (value: Record<string, Json>) => void; reject: (err: Error) => void }
  >();
  private nextId = 1;
  private statusHandlers: StatusHandler[] = [];
  private openPromise: Promise<void> | null = null;
  private ready = false;
  private backlog: BridgeFrame[] = [];

  constructor(
    readonly url: string,
    private readonly factory: SocketFactory = defaultFactory,
  ) {}

  connect(): Promise<void> {
    if (this.openPromise) return this.openPromise;
    const socket = this.factory(this.url);
    this.socket = socket;
    socket.addEventListener('message', (event: any) =>
      this.handleFrame(String(event.data)),
    );
    this.openPromise = new Promise((resolve, reject) => {
      socket.addEventListener('open', () => {
        this.ready = true;
        for (const frame of this.backlog.splice(0)) {
          socket.send(JSON.stringify(frame));
        }
        resolve();
      });
      socket.addEventListener('error', (event: any) =>
        reject(new Error(`bridge connection failed: ${event?.message ?? 'error'}`)),
      );
    });
    return this.openPromise;
  }

  close(): void {
    this.socket?.close();
    this.socket = null;
    this.openPromise = null;
    this.ready = false;
  }

  /** Frames sent before the socket opens are queued and flushed on open. */
  private send(frame: BridgeFrame): void {
    if (!this.socket || !this.ready) {
      this.backlog.push(frame);
      return;
    }
    this.socket.send(JSON.stringify(frame));
  }

  subscribe(topic: string, handler: MessageHandler): void {
    const existing = this.handlers.get(topic);
    if (existing) {
      existing.push(handler);
      return; // already subscribed on the wire
    }
    this.handlers.set(topic, [handler]);
    this.send({ op: 'subscribe', topic });
  }

  unsubscribe(topic: string): void {
    if (!this.handlers.delete(topic)) return;
    this.send({ op: 'unsubscribe', topic });
  }

  publish(topic: string, msg: Record<string, Json>): void {
    this.send({ op: 'publish', topic, msg });
  }

  callService(service: string, args: Record<string, Json> = {}): Promise<Record<string, Json>> {
    const id = `ui${this.nextId++}`;
    return new Promise((resolve, reject) => {
      this.pending.set(id, { resolve, reject });
      this.send({ op: 'call_service', service, id, args });
    });
  }

  onStatus(handler: StatusHandler): void {
    this.statusHandlers.push(handler);
  }

  // exposed for tests with a scripted socket
  handleFrame(data: string): void {
    let frame: BridgeFrame;
    try {
      frame = JSON.parse(data) as BridgeFrame;
    } catch {
      return; // not a protocol frame; ignore
    }
    if (frame.op === 'publish' && frame.topic && typeof frame.msg === 'object' && frame.msg) {
      for (const handler of this.handlers.get(frame.topic) ?? []) {
        handler(frame.msg);
      }
      return;
    }
    if (frame.op === 'service_response' && frame.id) {
      const waiter = this.pending.get(frame.id);
      if (!waiter) return;
      this.pending.delete(frame.id);
      if (frame.error) {
        waiter.reject(new Error(`${frame.error.code}: ${frame.error.message}`));
      } else {
        waiter.resolve(frame.result ?? {});
      }
      return;
    }
    if (frame.op === 'status') {
      // a status with an id settles the matching call (e.g. unknown_service)
      if (frame.id && this.pending.has(frame.id)) {
        const waiter = this.pending.get(frame.id)!;
        this.pending.delete(frame.id);
        waiter.reject(new Error(String(frame.msg ?? 'status error')));
      }
      for (const handler of this.statusHandlers) handler(frame);
    }
  }
}
