/** UI strings, mirroring the server's locales: Polish default, English
 * available. Domain values (states, spec names, markup) come from the server
 * and are never translated client-side. */

export type Locale = "pl" | "en";

export const STRINGS = {
  pl: {
    assignments: "Zadania",
    submit: "Wyślij",
    submitting: "Ocenianie…",
    score: "Wynik",
    attempt: "Próba",
    testResults: "Wyniki testów",
    compileErrors: "Błędy kompilacji",
    inputValues: "Dane wejściowe",
    expectedOutcome: "Oczekiwany wynik",
    hintPending: "Generowanie podpowiedzi…",
    hintTitle: "Podpowiedź",
    hintUnavailable: "Podpowiedź jest niedostępna dla tego zgłoszenia.",
    ratingPrompt: "Jak przydatna była ta podpowiedź?",
    ratingLow: "Zupełnie nieprzydatna",
    ratingHigh: "Niezwykle przydatna",
    ratingThanks: "Dziękujemy za ocenę.",
    affectQuestion: "Która opcja najlepiej opisuje Twoje obecne odczucia?",
    affectDismiss: "Pomiń",
    affectRetry: "Nie udało się zapisać odpowiedzi — spróbuj ponownie.",
    networkError: "Błąd sieci — Twój kod nie został utracony.",
    retry: "Spróbuj ponownie",
    line: "Wiersz",
  },
  en: {
    assignments: "Assignments",
    submit: "Submit",
    submitting: "Grading…",
    score: "Score",
    attempt: "Attempt",
    testResults: "Test results",
    compileErrors: "Compiler errors",
    inputValues: "Input values",
    expectedOutcome: "Expected outcome",
    hintPending: "Generating a hint…",
    hintTitle: "Hint",
    hintUnavailable: "No hint is available for this submission.",
    ratingPrompt: "How useful was this hint?",
    ratingLow: "Not useful at all",
    ratingHigh: "Extremely useful",
    ratingThanks: "Thanks for rating.",
    affectQuestion: "Which option best describes your current feelings?",
    affectDismiss: "Skip",
    affectRetry: "Could not record your answer — please retry.",
    networkError: "Network error — your code was not lost.",
    retry: "Retry",
    line: "Line",
  },
} as const;

export type StringKey = keyof (typeof STRINGS)["pl"];

export type Translate = (key: StringKey) => string;

export function translator(locale: Locale): Translate {
  return (key) => STRINGS[locale][key];
}
