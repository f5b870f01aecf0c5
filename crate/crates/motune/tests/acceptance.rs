// Acceptance suite placeholder; criteria are added as modules build out.
