/**
 * Session client: HTTP lifecycle plus the event stream, with all outbound
 * commands serialized through one queue so they reach the server in the
 * order the user issued them. The transport is injectable; tests drive the
 * client against a scripted mock instead of the network.
 */

import { parseEvent, WireError, WIRE_VERSION, type Snapshot } from './wire';
import type { ViewModel } from './viewmodel';

export interface CommandResult {
  ok: boolean;
  status: number;
  body: any;
}

export interface ServerTransport {
  createSession(config: unknown, seed?: number): Promise<{ session_id: string }>;
  getSnapshot(sessionId: string): Promise<Snapshot>;
  postCommand(sessionId: string, commandJson: string): Promise<CommandResult>;
  /** Opens the event stream; returns a function that closes it. */
  openStream(sessionId: string, onMessage: (text: string) => void,
             onClose: () => void): () => void;
}

export class HttpTransport implements ServerTransport {
  constructor(private baseUrl: string) {}

  async createSession(config: unknown, seed?: number): Promise<{ session_id: string }> {
    const body: Record<string, unknown> = { v: WIRE_VERSION, config };
    if (seed !== undefined) {
      body.seed = seed;
    }
    const response = await fetch(`${this.baseUrl}/sessions`, {
      method: 'POST',
      body: JSON.stringify(body),
    });
    const parsed = await response.json();
    if (!response.ok) {
      throw new WireError(parsed.message ?? `create failed with ${response.status}`);
    }
    return parsed;
  }

  async getSnapshot(sessionId: string): Promise<Snapshot> {
    const response = await fetch(`${this.baseUrl}/sessions/${sessionId}/snapshot`);
    return (await response.json()) as Snapshot;
  }

  async postCommand(sessionId: string, commandJson: string): Promise<CommandResult> {
    const response = await fetch(`${this.baseUrl}/sessions/${sessionId}/commands`, {
      method: 'POST',
      body: commandJson,
    });
    return { ok: response.ok, status: response.status, body: await response.json() };
  }

  openStream(sessionId: string, onMessage: (text: string) => void,
             onClose: () => void): () => void {
    const wsBase = this.baseUrl.replace(/^http/, 'ws');
    const socket = new WebSocket(`${wsBase}/sessions/${sessionId}/stream`);
    socket.onmessage = (event) => onMessage(String(event.data));
    socket.onclose = onClose;
    socket.onerror = onClose;
    return () => socket.close();
  }
}

export class SessionClient {
  sessionId: string | null = null;
  lastError: string | null = null;

  private closeStream: (() => void) | null = null;
  private outbound: Promise<unknown> = Promise.resolve();

  constructor(private transport: ServerTransport, private vm: ViewModel,
              private onChange: () => void = () => {}) {}

  async connect(config: unknown, seed?: number): Promise<string> {
    this.vm.connection = 'connecting';
    const { session_id } = await this.transport.createSession(config, seed);
    this.sessionId = session_id;
    this.closeStream = this.transport.openStream(
      session_id,
      (text) => this.handleMessage(text),
      () => {
        this.vm.connection = 'closed';
        this.onChange();
      },
    );
    this.vm.connection = 'open';
    this.onChange();
    return session_id;
  }

  private handleMessage(text: string): void {
    try {
      this.vm.applyEvent(parseEvent(text));
    } catch (error) {
      if (error instanceof WireError) {
        this.vm.halt(error.message);
      } else {
        throw error;
      }
    }
    this.onChange();
  }

  /**
   * Queue one command; refused locally when disconnected. Resolves with the
   * server's verdict so forms can render rejections inline.
   */
  send(commandJson: string): Promise<CommandResult> {
    if (this.vm.connection !== 'open' || this.sessionId === null) {
      this.lastError = 'not connected; reconnect before sending commands';
      this.onChange();
      return Promise.resolve({ ok: false, status: 0, body: { message: this.lastError } });
    }
    const sessionId = this.sessionId;
    const next = this.outbound.then(async () => {
      const result = await this.transport.postCommand(sessionId, commandJson);
      this.lastError = result.ok ? null : String(result.body?.message ?? 'command rejected');
      this.onChange();
      return result;
    });
    this.outbound = next.catch(() => undefined);
    return next;
  }

  disconnect(): void {
    if (this.closeStream) {
      this.closeStream();
      this.closeStream = null;
    }
    this.vm.connection = 'closed';
    this.onChange();
  }
}
