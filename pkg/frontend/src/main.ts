import { SessionClient } from "./session.js";
import { App } from "./ui.js";

function connect(): void {
    const root = document.getElementById("app")!;
    const url = `ws://${location.host}/ws`;
    const socket = new WebSocket(url);
    const client = new SessionClient(
        { send: (data) => socket.send(data), close: () => socket.close() },
    );
    const app = new App(client, root);
    client.events = {
        onCatalog: (catalog) => app.setCatalog(catalog),
        onScreen: (screen) => app.show(screen),
        onEnrolled: () => app.setStatus("enrolled — now authenticate"),
        onServerError: (code, message) =>
            app.setStatus(`error ${code}: ${message}`),
    };

    socket.onopen = () => client.hello();
    socket.onmessage = (ev) => client.handleRaw(String(ev.data));
    socket.onclose = () => client.onDisconnect();
    app.show({ kind: "connecting" });
}

connect();
