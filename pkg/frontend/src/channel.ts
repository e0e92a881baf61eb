/**
 * Transport abstraction: anything that carries one JSON message per line.
 * The browser uses a WebSocket (one message per text frame); tests use an
 * in-memory mock.
 */

export interface LineChannel {
  send(line: string): void;
  onLine(handler: (line: string) => void): void;
  onClose(handler: () => void): void;
  close(): void;
}

export class WebSocketChannel implements LineChannel {
  private handlers: Array<(line: string) => void> = [];
  private closers: Array<() => void> = [];
  private queue: string[] = [];
  private open = false;

  constructor(private socket: WebSocket) {
    socket.addEventListener("open", () => {
      this.open = true;
      for (const line of this.queue.splice(0)) socket.send(line);
    });
    socket.addEventListener("message", (ev) => {
      for (const h of this.handlers) h(String(ev.data));
    });
    socket.addEventListener("close", () => {
      for (const h of this.closers) h();
    });
  }

  send(line: string): void {
    if (this.open) this.socket.send(line);
    else this.queue.push(line);
  }

  onLine(handler: (line: string) => void): void {
    this.handlers.push(handler);
  }

  onClose(handler: () => void): void {
    this.closers.push(handler);
  }

  close(): void {
    this.socket.close();
  }
}

/** Scripted channel for tests: canned replies keyed by request kind. */
export class MockChannel implements LineChannel {
  sent: string[] = [];
  private handlers: Array<(line: string) => void> = [];
  private closers: Array<() => void> = [];
  private responder: ((line: string) => string | null) | null = null;
  disabled = false;

  respondWith(responder: (line: string) => string | null): void {
    this.responder = responder;
  }

  send(line: string): void {
    if (this.disabled) return;
    this.sent.push(line);
    if (this.responder) {
      const reply = this.responder(line);
      if (reply !== null) {
        queueMicrotask(() => {
          for (const h of this.handlers) h(reply);
        });
      }
    }
  }

  deliver(line: string): void {
    for (const h of this.handlers) h(line);
  }

  onLine(handler: (line: string) => void): void {
    this.handlers.push(handler);
  }

  onClose(handler: () => void): void {
    this.closers.push(handler);
  }

  close(): void {
    for (const h of this.closers) h();
  }
}
