/** UI label files for the two supported corpus languages. */

export type LabelKey =
  | "account.title"
  | "account.create"
  | "account.use-key"
  | "account.apply-key"
  | "account.key-applied"
  | "account.key-once"
  | "register.title"
  | "register.url"
  | "register.language"
  | "register.set"
  | "register.submit"
  | "register.empty-url"
  | "repo.open"
  | "repo.language"
  | "repo.metric"
  | "repo.vocabulary"
  | "repo.no-vocabulary"
  | "repo.snapshot"
  | "repo.no-snapshot"
  | "jobs.start"
  | "jobs.start-full"
  | "jobs.start-incremental"
  | "jobs.records"
  | "jobs.published"
  | "jobs.stale"
  | "preview.title"
  | "preview.query"
  | "preview.run"
  | "preview.no-model"
  | "preview.expansion"
  | "vocabulary.upload"
  | "vocabulary.placeholder"
  | "vocabulary.loaded";

const EN: Record<LabelKey, string> = {
  "account.title": "Account",
  "account.create": "Create account",
  "account.use-key": "Existing API key",
  "account.apply-key": "Use key",
  "account.key-applied": "API key applied.",
  "account.key-once": "Account created. Copy the API key now; it is shown only once:",
  "register.title": "Register a repository",
  "register.url": "OAI-PMH endpoint URL",
  "register.language": "Corpus language",
  "register.set": "OAI set (optional)",
  "register.submit": "Register",
  "register.empty-url": "Enter the OAI-PMH endpoint URL first.",
  "repo.open": "Open",
  "repo.language": "Language",
  "repo.metric": "Metric",
  "repo.vocabulary": "Vocabulary",
  "repo.no-vocabulary": "harvested subjects (open)",
  "repo.snapshot": "Model snapshot",
  "repo.no-snapshot": "none yet",
  "jobs.start": "Start harvest job",
  "jobs.start-full": "Full harvest",
  "jobs.start-incremental": "Incremental harvest",
  "jobs.records": "records seen",
  "jobs.published": "model published",
  "jobs.stale": "Live status unavailable; showing the last known state.",
  "preview.title": "Recommendation preview",
  "preview.query": "Query term",
  "preview.run": "Preview",
  "preview.no-model": "No published model yet. Run a harvest job first.",
  "preview.expansion": "Expansion proposal",
  "vocabulary.upload": "Upload vocabulary",
  "vocabulary.placeholder": "One controlled term per line",
  "vocabulary.loaded": "terms loaded",
};

const DE: Record<LabelKey, string> = {
  "account.title": "Konto",
  "account.create": "Konto anlegen",
  "account.use-key": "Vorhandener API-Schlüssel",
  "account.apply-key": "Schlüssel verwenden",
  "account.key-applied": "API-Schlüssel übernommen.",
  "account.key-once": "Konto angelegt. Den API-Schlüssel jetzt kopieren; er wird nur einmal angezeigt:",
  "register.title": "Repository registrieren",
  "register.url": "OAI-PMH-Schnittstelle (URL)",
  "register.language": "Korpussprache",
  "register.set": "OAI-Set (optional)",
  "register.submit": "Registrieren",
  "register.empty-url": "Bitte zuerst die URL der OAI-PMH-Schnittstelle angeben.",
  "repo.open": "Öffnen",
  "repo.language": "Sprache",
  "repo.metric": "Maß",
  "repo.vocabulary": "Vokabular",
  "repo.no-vocabulary": "geerntete Schlagwörter (offen)",
  "repo.snapshot": "Modellstand",
  "repo.no-snapshot": "noch keiner",
  "jobs.start": "Harvest-Lauf starten",
  "jobs.start-full": "Vollständiger Lauf",
  "jobs.start-incremental": "Inkrementeller Lauf",
  "jobs.records": "Datensätze gesehen",
  "jobs.published": "Modell veröffentlicht",
  "jobs.stale": "Live-Status nicht erreichbar; letzter bekannter Stand.",
  "preview.title": "Empfehlungsvorschau",
  "preview.query": "Suchbegriff",
  "preview.run": "Vorschau",
  "preview.no-model": "Noch kein veröffentlichtes Modell. Zuerst einen Harvest-Lauf starten.",
  "preview.expansion": "Vorschlag zur Erweiterung",
  "vocabulary.upload": "Vokabular hochladen",
  "vocabulary.placeholder": "Ein kontrollierter Begriff pro Zeile",
  "vocabulary.loaded": "Begriffe geladen",
};

const LANGUAGES: Record<UiLanguage, Record<LabelKey, string>> = { en: EN, de: DE };

export type UiLanguage = "en" | "de";

let active: Record<LabelKey, string> = EN;

export function setUiLanguage(language: UiLanguage): void {
  active = LANGUAGES[language] ?? EN;
}

export function label(key: LabelKey): string {
  return active[key];
}
