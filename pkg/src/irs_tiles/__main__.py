from irs_tiles.cli import main

raise SystemExit(main())
