import os
import sys

# Load environment variables from .env file if it exists
if os.path.exists(".env"):
    from dotenv import load_dotenv
    load_dotenv()

from sdcabench.cli import main

if __name__ == "__main__":
    sys.exit(main())
