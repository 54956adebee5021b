import { App } from "./app";
import "./style.css";

// Served by the annotation service itself (same origin) or a dev proxy.
const app = new App(document, "");
document.body.appendChild(app.element);
