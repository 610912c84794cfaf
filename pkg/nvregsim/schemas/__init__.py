# Config and report schemas
