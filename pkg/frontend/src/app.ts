/** Review session state machine.
 *
 * Holds no constraint logic: after every mutation the full session document
 * (and, when gold is attached, the accuracy) is re-fetched, and the view is
 * rendered from those server responses alone. At most one mutating request
 * is in flight; further actions are rejected until it settles.
 */

import { ApiClient, ApiRequestError } from "./api.js";
import type {
  AccuracyDoc,
  ApiError,
  LabelRunRequest,
  PropertyKey,
  SessionDoc,
  ValueSymbol,
} from "./types.js";

export interface AppState {
  session: SessionDoc | null;
  accuracy: AccuracyDoc | null;
  busy: boolean;
  error: ApiError | null;
}

export type Listener = (state: AppState) => void;

export class ReviewApp {
  private state: AppState = { session: null, accuracy: null, busy: false, error: null };
  private listeners: Listener[] = [];

  constructor(private readonly client: ApiClient) {}

  getState(): AppState {
    return this.state;
  }

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
    listener(this.state);
  }

  private setState(patch: Partial<AppState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener(this.state);
  }

  /** Pull the authoritative session (and accuracy, if scored) from the server. */
  private async sync(sessionId: string): Promise<void> {
    const session = await this.client.getSession(sessionId);
    let accuracy: AccuracyDoc | null = null;
    if (session.gold !== null) {
      accuracy = await this.client.getAccuracy(sessionId);
    }
    this.setState({ session, accuracy });
  }

  private async mutate(action: () => Promise<string>): Promise<boolean> {
    if (this.state.busy) return false;
    this.setState({ busy: true, error: null });
    try {
      const sessionId = await action();
      await this.sync(sessionId);
      this.setState({ busy: false });
      return true;
    } catch (error) {
      // surface the server's error verbatim; keep the last good state
      const apiError: ApiError =
        error instanceof ApiRequestError
          ? { error_code: error.errorCode, message: error.message }
          : { error_code: "client_error", message: String(error) };
      this.setState({ busy: false, error: apiError });
      return false;
    }
  }

  loadBenchmark(name: string): Promise<boolean> {
    return this.mutate(async () => {
      const session = await this.client.createSession({ benchmark: name });
      return session.id;
    });
  }

  loadSessionDocument(body: Record<string, unknown>): Promise<boolean> {
    return this.mutate(async () => {
      const session = await this.client.createSession(body);
      return session.id;
    });
  }

  private requireSession(): SessionDoc {
    if (!this.state.session) throw new Error("no active session");
    return this.state.session;
  }

  editLabel(classId: string, property: PropertyKey, value: ValueSymbol | null): Promise<boolean> {
    return this.mutate(async () => {
      const session = this.requireSession();
      await this.client.setLabel(session.id, classId, property, value);
      return session.id;
    });
  }

  submitGuidance(text: string): Promise<boolean> {
    return this.mutate(async () => {
      const session = this.requireSession();
      await this.client.addGuidance(session.id, text);
      return session.id;
    });
  }

  runLabeler(request: LabelRunRequest): Promise<boolean> {
    return this.mutate(async () => {
      const session = this.requireSession();
      await this.client.runLabeler(session.id, request);
      return session.id;
    });
  }
}
