import { renderApp } from "./app";
import { createStore, initialState } from "./store";

const params = new URLSearchParams(window.location.search);
const baseUrl =
  params.get("service") ??
  localStorage.getItem("empathnet.service") ??
  "http://127.0.0.1:8000";
const token = params.get("token") ?? localStorage.getItem("empathnet.token") ?? "";

const store = createStore(initialState(baseUrl, token));
store.subscribe((state) => {
  localStorage.setItem("empathnet.service", state.baseUrl);
  localStorage.setItem("empathnet.token", state.token);
});

const root = document.getElementById("app");
if (root) renderApp(root, store);
