"""Result files and the JSONL run log."""
