import { ApiClient } from "./api.js";
import { boot } from "./app.js";

const root = document.getElementById("app");
if (root) {
  const client = new ApiClient(window.location.origin);
  boot(client, root);
}
