from cattaneo_hyp.cli import main

raise SystemExit(main())
