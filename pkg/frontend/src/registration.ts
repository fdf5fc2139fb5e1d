import { ApiError, type ApiClient } from "./api.js";
import { el } from "./dom.js";
import { label } from "./labels.js";
import type { RepositoryProfile } from "./types.js";

export interface RegistrationHandlers {
  onRegistered(profile: RepositoryProfile): void;
}

/**
 * Repository registration form. An empty URL is caught client-side without
 * any request; a rejected endpoint shows the service's error text verbatim
 * under the form while every field keeps its value.
 */
export function renderRegistrationForm(
  container: HTMLElement,
  client: ApiClient,
  handlers: RegistrationHandlers,
): HTMLFormElement {
  const urlInput = el("input", {
    type: "text",
    name: "oai_url",
    "data-role": "oai-url",
    placeholder: "https://repository.example.org/oai",
  });
  const languageSelect = el("select", { name: "language", "data-role": "language" }, [
    el("option", { value: "de" }, ["de"]),
    el("option", { value: "en" }, ["en"]),
  ]);
  const setInput = el("input", {
    type: "text",
    name: "set_spec",
    "data-role": "set-spec",
  });
  const submit = el("button", { type: "submit" }, [label("register.submit")]);
  const errorBox = el("p", { class: "form-error", "data-role": "form-error" });

  const form = el("form", { class: "registration-form" }, [
    el("h2", {}, [label("register.title")]),
    el("label", {}, [label("register.url"), urlInput]),
    el("label", {}, [label("register.language"), languageSelect]),
    el("label", {}, [label("register.set"), setInput]),
    submit,
    errorBox,
  ]);

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const oaiUrl = urlInput.value.trim();
    errorBox.textContent = "";
    if (!oaiUrl) {
      errorBox.textContent = label("register.empty-url");
      return;
    }
    submit.disabled = true;
    void client
      .registerRepository({
        oai_url: oaiUrl,
        language: languageSelect.value,
        set_spec: setInput.value.trim() || null,
      })
      .then((profile) => {
        form.reset();
        handlers.onRegistered(profile);
      })
      .catch((err: unknown) => {
        errorBox.textContent =
          err instanceof ApiError ? err.detail : String(err);
      })
      .finally(() => {
        submit.disabled = false;
      });
  });

  container.append(form);
  return form;
}
