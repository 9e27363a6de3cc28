// Entry point: mount the app against the service named by ?service=,
// defaulting to same-origin.

import { LayoutlabClient } from "./api";
import { App } from "./app";

const params = new URLSearchParams(window.location.search);
const base = params.get("service") ?? window.location.origin;

const root = document.getElementById("app") ?? document.body;
const app = new App(root, new LayoutlabClient(base));
void app.init();
